// io.hpp: CSV and JSON export of the core result types
//
// Floating-point CSV fields are printed with 15 significant digits in
// scientific notation, fields separated by ", ", rows terminated by LF.

#pragma once

#include <pointersim/common.hpp>
#include <pointersim/continuum.hpp>
#include <pointersim/decoherence.hpp>
#include <pointersim/dynamics.hpp>
#include <pointersim/ensemble.hpp>
#include <pointersim/hilbert.hpp>
#include <pointersim/pointer.hpp>

#include <ostream>
#include <span>
#include <string>
#include <string_view>

namespace pointersim {

/// "%.14e"; non-finite values print as nan / inf / -inf.
std::string format_real(double v);

std::string state_to_json(const TotalState& state);
/// Throws DomainError on malformed input or a non-normalized state.
TotalState state_from_json(std::string_view text);

void write_trajectory_csv(std::ostream& os, const PhaseTrajectory& trajectory);
void write_survival_csv(std::ostream& os, const SurvivalHistogram& hist);
void write_landscape_csv(std::ostream& os, const LambdaLandscape& landscape);
/// nu, theta, abs_weight, lambda, kept
void write_branches_csv(std::ostream& os, std::span<const Branch> branches, const PointerSelection& selection);

std::string report_to_json(const DecoherenceReport& report);

void write_scaling_csv(std::ostream& os, std::span<const ScalingRow> rows);
/// Before/after means with their standard errors.
void write_scaling_detail_csv(std::ostream& os, std::span<const ScalingRow> rows);
void write_validity_csv(std::ostream& os, std::span<const ValidityRow> rows);

void write_density_csv(std::ostream& os, const GridWavefunction& grid, const Eigen::VectorXd& density);
/// Undefined visibilities print as nan.
void write_competition_csv(std::ostream& os, std::span<const CompetitionRow> rows);

}  // namespace pointersim
