#include "ppg/run.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <iostream>
#include <string>

namespace
{

/// Shared flags for the subcommands that score data against a reference.
struct CommonFlags
{
   std::string mode = "in-sample";
   std::string pooling = "concat";
};

void
add_common_options( CLI::App* cmd, ppg::run::RunConfig& config,
                    CommonFlags& flags )
{
   cmd->add_option( "--spec", config.spec_path,
                    "indicator specification (JSON)" )
       ->required();
   cmd->add_option( "--data", config.data_paths, "survey data (CSV)" )
       ->required();
   cmd->add_option( "--mode", flags.mode,
                    "reference mode: in-sample, anchored or pooled" )
       ->check( CLI::IsMember( { "in-sample", "in_sample", "anchored",
                                 "pooled" } ) );
   cmd->add_option( "--reference", config.reference_path,
                    "anchored: previously saved reference document" );
   cmd->add_option( "--baseline", config.baseline_paths,
                    "anchored: baseline data (CSV) to fit the reference "
                    "on" );
   cmd->add_option( "--pooling", flags.pooling,
                    "pooled weighting: concat keeps survey weights, "
                    "reweight rescales each dataset to equal total" )
       ->check( CLI::IsMember( { "concat", "reweight" } ) );
   cmd->add_option( "--missing", config.missing_override,
                    "missing-data policy override: error, drop or impute" )
       ->check( CLI::IsMember( { "error", "drop", "impute" } ) );
   cmd->add_option( "--subgroup", config.subgroup_column,
                    "subgroup column override" );
   cmd->add_option( "--format", config.format, "output format" )
       ->check( CLI::IsMember( { "csv", "text" } ) );
   cmd->add_flag( "--pretty", config.pretty,
                  "round displayed values to 3 decimals" );
   cmd->add_option( "--out", config.out_path,
                    "output file (default: stdout)" );
}

void
apply_common_flags( ppg::run::RunConfig& config, const CommonFlags& flags )
{
   std::string mode = flags.mode == "in_sample" ? "in-sample" : flags.mode;
   config.mode = ppg::ref_mode_from_string( mode );
   config.pooling = flags.pooling == "reweight"
                        ? ppg::PoolingRule::equal_weight
                        : ppg::PoolingRule::concatenate;
}

void
read_environment( ppg::run::RunConfig& config )
{
   if( const char* dir = std::getenv( "PPG_OUT_DIR" ) )
      config.out_dir = dir;
   if( const char* threads = std::getenv( "PPG_THREADS" ) )
   {
      char* end = nullptr;
      long value = std::strtol( threads, &end, 10 );
      if( end == threads || *end != '\0' || value < 1 )
         throw std::runtime_error(
             "PPG_THREADS must be a positive integer" );
      // the computation pipeline is sequential; the override is accepted
      // and validated so scripted callers can set it uniformly
   }
}

} // namespace

int
main( int argc, char** argv )
{
   CLI::App app{ "positional poverty gap measurement engine" };
   app.require_subcommand( 1 );

   ppg::run::RunConfig config;
   CommonFlags flags;
   std::string identification;
   int rc = ppg::run::exit_ok;

   CLI::App* compute = app.add_subcommand(
       "compute", "measure table over a poverty-cutoff grid" );
   add_common_options( compute, config, flags );
   compute
       ->add_option( "--k", config.k_tokens,
                     "poverty cutoffs: numbers in (0,1], union or "
                     "intersection (default grid: union, 0.25, 0.33, 0.5, "
                     "0.67, 0.75, 1.0)" )
       ->delimiter( ',' );
   compute->add_option( "--alpha", config.alpha,
                        "depth-aversion exponent (default 1)" )
       ->check( CLI::PositiveNumber );
   compute->callback(
       [&]
       {
          apply_common_flags( config, flags );
          rc = ppg::run::cmd_compute( config );
       } );

   CLI::App* anchor = app.add_subcommand(
       "anchor", "fit a reference on baseline data and save it" );
   anchor->add_option( "--spec", config.spec_path,
                       "indicator specification (JSON)" )
       ->required();
   anchor->add_option( "--data", config.data_paths,
                       "baseline data (CSV); several files are pooled" )
       ->required();
   anchor->add_option( "--pooling", flags.pooling,
                       "pooled weighting: concat or reweight" )
       ->check( CLI::IsMember( { "concat", "reweight" } ) );
   anchor->add_option( "--missing", config.missing_override,
                       "missing-data policy override: error, drop or "
                       "impute" )
       ->check( CLI::IsMember( { "error", "drop", "impute" } ) );
   anchor->add_option( "--out", config.out_path,
                       "destination for the reference document" )
       ->required();
   anchor->callback(
       [&]
       {
          apply_common_flags( config, flags );
          rc = ppg::run::cmd_anchor( config );
       } );

   CLI::App* decompose = app.add_subcommand(
       "decompose", "subgroup decomposition at one poverty cutoff" );
   add_common_options( decompose, config, flags );
   decompose
       ->add_option( "--k", config.k_tokens,
                     "poverty cutoff (default: union)" )
       ->delimiter( ',' );
   decompose->add_flag( "--per-subgroup-refs", config.per_subgroup_refs,
                        "score each subgroup on its own distribution "
                        "(breaks the decomposition identity)" );
   decompose->add_flag( "--allow-inconsistent", config.allow_inconsistent,
                        "acknowledge that per-subgroup references do not "
                        "reconstruct the population index" );
   decompose->callback(
       [&]
       {
          apply_common_flags( config, flags );
          rc = ppg::run::cmd_decompose( config );
       } );

   CLI::App* compare = app.add_subcommand(
       "compare-af", "rank concordance with normalized cutoff gaps" );
   add_common_options( compare, config, flags );
   compare
       ->add_option( "--k", config.k_tokens,
                     "poverty cutoff (default: union)" )
       ->delimiter( ',' );
   compare
       ->add_option( "--bin-width", config.bin_width,
                     "rank-difference histogram bin width" )
       ->check( CLI::Range( 1e-6, 2.0 ) );
   compare->add_option( "--scatter-out", config.scatter_out,
                        "write per-person rank pairs (CSV)" );
   compare->add_option( "--hist-out", config.hist_out,
                        "write the rank-difference histogram (CSV)" );
   compare->callback(
       [&]
       {
          apply_common_flags( config, flags );
          rc = ppg::run::cmd_compare_af( config );
       } );

   CLI::App* scatter = app.add_subcommand(
       "scatter", "per-person deprivation share and positional gap" );
   add_common_options( scatter, config, flags );
   scatter
       ->add_option( "--k", config.k_tokens,
                     "poverty cutoff (default: union)" )
       ->delimiter( ',' );
   scatter->callback(
       [&]
       {
          apply_common_flags( config, flags );
          rc = ppg::run::cmd_scatter( config );
       } );

   CLI::App* axioms = app.add_subcommand(
       "axioms", "run the property-verification grid" );
   axioms->add_option( "--seed", config.lab.seed, "base random seed" );
   axioms->add_option( "--trials", config.lab.random_trials,
                       "random trials per grid cell" );
   axioms->add_option( "--rows", config.lab.exhaustive_rows,
                       "exhaustive enumeration row bound" );
   axioms->add_option( "--cols", config.lab.exhaustive_cols,
                       "exhaustive enumeration column bound" );
   axioms->add_option( "--scale", config.lab.exhaustive_scale,
                       "exhaustive enumeration scale bound" );
   axioms->add_option( "--attempts", config.lab.witness_attempts,
                       "counterexample search budget" );
   axioms->add_option( "--mode", config.lab_mode_filter,
                       "check one reference policy only" )
       ->check( CLI::IsMember( { "anchored", "in-sample", "in_sample" } ) );
   axioms
       ->add_option( "--identification", identification,
                     "restrict identification (union)" )
       ->check( CLI::IsMember( { "union" } ) );
   axioms->add_option( "--report", config.report_path,
                       "write the full JSON report here" );
   axioms->add_option( "--out", config.out_path,
                       "write the text summary here (default: stdout)" );
   axioms
       ->add_flag( "--inject-defect", config.lab.inject_skip_censoring,
                   "skip status censoring (self-test; the grid must "
                   "detect it)" )
       ->group( "" );
   axioms->callback(
       [&]
       {
          config.lab.union_identification = identification == "union";
          rc = ppg::run::cmd_axioms( config );
       } );

   try
   {
      read_environment( config );
      app.parse( argc, argv );
   }
   catch( const CLI::ParseError& e )
   {
      return app.exit( e );
   }
   catch( const std::exception& e )
   {
      std::cerr << "error: " << e.what() << "\n";
      return ppg::run::exit_error;
   }
   return rc;
}
