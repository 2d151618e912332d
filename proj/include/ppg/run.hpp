#ifndef PPG_RUN_HPP
#define PPG_RUN_HPP

#include "ppg/axiom_lab.hpp"
#include "ppg/indicator_model.hpp"
#include "ppg/reference.hpp"

#include <string>
#include <vector>

namespace ppg::run
{

/// Process exit codes shared by every subcommand.
enum ExitCode
{
   exit_ok = 0,
   exit_error = 1,         // bad config, ingestion or computation failure
   exit_grid_mismatch = 2, // a property that should hold was violated
   exit_inconclusive = 3   // an expected counterexample was not found
};

/// Everything a subcommand needs, filled in by the command-line front end.
/// Fields irrelevant to a given subcommand are ignored by it.
struct RunConfig
{
   std::vector<std::string> data_paths;
   std::string spec_path;
   RefMode mode = RefMode::in_sample;
   std::string reference_path;              // anchored: load this document
   std::vector<std::string> baseline_paths; // anchored: or fit from these
   PoolingRule pooling = PoolingRule::concatenate;
   std::vector<std::string> k_tokens; // numbers, "union" or "intersection";
                                      // empty = default grid
   double alpha = 1.0;
   std::string subgroup_column;  // override; empty keeps the spec's choice
   std::string missing_override; // "", "error", "drop" or "impute"
   std::string format = "csv";   // "csv" or "text"
   bool pretty = false;          // 3-decimal display rounding
   std::string out_path;         // empty = stdout
   std::string out_dir;          // prefix for relative output paths
   double bin_width = 0.05;      // compare-af histogram resolution
   std::string scatter_out;      // compare-af: per-person rank pairs
   std::string hist_out;         // compare-af: rank-difference histogram
   bool per_subgroup_refs = false;
   bool allow_inconsistent = false;

   lab::LabOptions lab;
   std::string lab_mode_filter; // "", "anchored" or "in-sample"
   std::string report_path;     // axioms: JSON report destination
};

/// Measure table over the k grid: one row per (dataset, k).
int
cmd_compute( const RunConfig& config );

/// Fit a reference on the given data (pooled when several files are named)
/// and persist it to `out_path`.
int
cmd_anchor( const RunConfig& config );

/// Subgroup decomposition at a single poverty cutoff.
int
cmd_decompose( const RunConfig& config );

/// Concordance between positional depth and normalized cutoff gaps.
int
cmd_compare_af( const RunConfig& config );

/// Per-person deprivation share and positional gap for the poor.
int
cmd_scatter( const RunConfig& config );

/// Run the verification grid; exit code reflects the outcome.
int
cmd_axioms( const RunConfig& config );

/// Resolve k tokens against the indicator weights.  Empty input yields the
/// default grid {union, 0.25, 0.33, 0.5, 0.67, 0.75, 1.0}; duplicates
/// collapse and the result is ascending.
std::vector<double>
resolve_k_grid( const std::vector<std::string>& tokens,
                const std::vector<IndicatorSpec>& indicators );

/// Full-precision (round-trippable) or 3-decimal rendering of a value.
std::string
format_value( double v, bool pretty );

} // namespace ppg::run

#endif
