#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace nodal_lab::defaults {

inline constexpr int kVersion = 1;

// Acceptance tolerances and budgets.
inline constexpr double kFrequencyExactTol = 1e-8;
inline constexpr double kClosedFormTol = 1e-8;
inline constexpr double kCEmpDrift = 0.10;
inline constexpr double kL2DoublingCMax = 10.0;
inline constexpr double kL2RatioRelTol = 1e-9;
inline constexpr double kDoublingIndexTol = 1e-6;
inline constexpr double kDecompositionRelTol = 1e-6;
inline constexpr double kNodalLengthRelTol = 0.02;
inline constexpr double kNodalCauchyTol = 0.01;
inline constexpr double kNodalSlopeTol = 0.05;
inline constexpr double kSolverRatioLo = 3.5;
inline constexpr double kSolverRatioHi = 4.5;
inline constexpr double kPropagationAlphaLo = 0.4;
inline constexpr double kPropagationAlphaHi = 0.6;
inline constexpr double kPartitionFraction = 0.5;
inline constexpr double kSimplexC = 0.02;
inline constexpr double kStrataTau = 1e-9;

// Runtime budgets in seconds.
inline constexpr double kRuntimeFrequency = 5.0;
inline constexpr double kRuntimeMonotonicity = 60.0;
inline constexpr double kRuntimeNodal = 10.0;
inline constexpr double kRuntimeSolver = 60.0;

// Experiment parameter defaults.
inline constexpr double kEps = 0.5;
inline constexpr int kNodalGrid = 1024;
inline constexpr int kPartitionA = 9;
inline constexpr double kContractionC = 0.05;
inline constexpr double kA2 = 9.0;
inline constexpr int kCubeSamples = 5;
inline constexpr int kPropagationGrid = 512;
inline constexpr int kSolverResolution = 128;
inline constexpr double kCompareSlope = 0.05;

inline nlohmann::json table() {
  const std::vector<std::pair<std::string, double>> rows = {
      {"frequency_exact_tol", kFrequencyExactTol},
      {"closed_form_tol", kClosedFormTol},
      {"c_emp_drift", kCEmpDrift},
      {"l2_doubling_C_max", kL2DoublingCMax},
      {"l2_ratio_rel_tol", kL2RatioRelTol},
      {"doubling_index_tol", kDoublingIndexTol},
      {"decomposition_rel_tol", kDecompositionRelTol},
      {"nodal_length_rel_tol", kNodalLengthRelTol},
      {"nodal_cauchy_tol", kNodalCauchyTol},
      {"nodal_slope_tol", kNodalSlopeTol},
      {"solver_ratio_lo", kSolverRatioLo},
      {"solver_ratio_hi", kSolverRatioHi},
      {"propagation_alpha_lo", kPropagationAlphaLo},
      {"propagation_alpha_hi", kPropagationAlphaHi},
      {"partition_fraction", kPartitionFraction},
      {"simplex_c", kSimplexC},
      {"strata_tau", kStrataTau},
      {"runtime_frequency_s", kRuntimeFrequency},
      {"runtime_monotonicity_s", kRuntimeMonotonicity},
      {"runtime_nodal_s", kRuntimeNodal},
      {"runtime_solver_s", kRuntimeSolver},
      {"eps", kEps},
      {"nodal_grid", kNodalGrid},
      {"partition_A", kPartitionA},
      {"contraction_c", kContractionC},
      {"A2", kA2},
      {"cube_samples", kCubeSamples},
      {"propagation_grid", kPropagationGrid},
      {"solver_resolution", kSolverResolution},
      {"compare_slope", kCompareSlope},
  };
  nlohmann::json j = nlohmann::json::object();
  j["version"] = kVersion;
  for (const auto& [k, v] : rows) j[k] = v;
  return j;
}

}  // namespace nodal_lab::defaults
