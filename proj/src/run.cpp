#include "ppg/run.hpp"

#include "ppg/concordance.hpp"
#include "ppg/csv.hpp"
#include "ppg/decomposition.hpp"
#include "ppg/identification.hpp"
#include "ppg/measures.hpp"
#include "ppg/stable_sum.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace ppg::run
{

namespace
{

[[noreturn]] void
config_fail( const std::string& what )
{
   throw std::runtime_error( "config: " + what );
}

std::string
join_notes( const std::vector<std::string>& parts )
{
   std::string out;
   for( const std::string& part : parts )
   {
      if( !out.empty() )
         out += "; ";
      out += part;
   }
   return out;
}

std::string
data_label( const std::string& path )
{
   return std::filesystem::path( path ).filename().string();
}

// ---------------------------------------------------------------------
// Output plumbing

std::string
resolve_out_path( const RunConfig& config, const std::string& path )
{
   if( path.empty() || config.out_dir.empty() ||
       std::filesystem::path( path ).is_absolute() )
      return path;
   std::error_code ec; // best effort; the writer reports real failures
   std::filesystem::create_directories( config.out_dir, ec );
   return ( std::filesystem::path( config.out_dir ) / path ).string();
}

void
write_text_file( const std::string& path, const std::string& content )
{
   std::ofstream out( path, std::ios::binary );
   if( !out )
      config_fail( "cannot open output file '" + path + "'" );
   out << content;
   if( !out )
      config_fail( "cannot write output file '" + path + "'" );
}

void
emit( const RunConfig& config, const std::string& content )
{
   std::string path = resolve_out_path( config, config.out_path );
   if( path.empty() )
      std::cout << content;
   else
      write_text_file( path, content );
}

/// A rectangular result table, rendered as CSV or aligned text.
struct OutTable
{
   std::vector<std::string> header;
   std::vector<std::vector<std::string>> rows;

   void
   add_row( std::vector<std::string> row )
   {
      if( row.size() != header.size() )
         config_fail( "internal: table row width mismatch" );
      rows.push_back( std::move( row ) );
   }

   std::string
   to_csv() const
   {
      std::ostringstream out;
      for( std::size_t c = 0; c < header.size(); ++c )
         out << ( c ? "," : "" ) << csv::escape( header[c] );
      out << "\n";
      for( const std::vector<std::string>& row : rows )
      {
         for( std::size_t c = 0; c < row.size(); ++c )
            out << ( c ? "," : "" ) << csv::escape( row[c] );
         out << "\n";
      }
      return out.str();
   }

   std::string
   to_text() const
   {
      std::vector<std::size_t> width( header.size() );
      for( std::size_t c = 0; c < header.size(); ++c )
         width[c] = header[c].size();
      for( const std::vector<std::string>& row : rows )
         for( std::size_t c = 0; c < row.size(); ++c )
            width[c] = std::max( width[c], row[c].size() );
      std::ostringstream out;
      auto line = [&]( const std::vector<std::string>& cells )
      {
         for( std::size_t c = 0; c < cells.size(); ++c )
         {
            if( c )
               out << "  ";
            out << cells[c];
            if( c + 1 < cells.size() )
               out << std::string( width[c] - cells[c].size(), ' ' );
         }
         out << "\n";
      };
      line( header );
      for( const std::vector<std::string>& row : rows )
         line( row );
      return out.str();
   }

   std::string
   render( const RunConfig& config ) const
   {
      if( config.format == "csv" )
         return to_csv();
      if( config.format == "text" )
         return to_text();
      config_fail( "unknown output format '" + config.format +
                   "' (expected csv or text)" );
   }
};

// ---------------------------------------------------------------------
// Input plumbing

struct Inputs
{
   ParsedSpec spec;
   std::vector<IndicatorSpec> indicators; // weights normalized
   std::vector<Dataset> datasets;         // one per data path
   std::vector<std::string> labels;
};

MissingPolicy
parse_missing_token( const std::string& token )
{
   if( token == "error" )
      return MissingPolicy::error;
   if( token == "drop" || token == "drop-row" )
      return MissingPolicy::drop_row;
   if( token == "impute" || token == "treat-as-most-deprived" )
      return MissingPolicy::most_deprived;
   config_fail( "unknown missing policy '" + token +
                "' (expected error, drop or impute)" );
}

ParsedSpec
load_spec( const RunConfig& config )
{
   if( config.spec_path.empty() )
      config_fail( "an indicator spec file is required" );
   ParsedSpec spec = parse_spec_file( config.spec_path );
   if( !config.missing_override.empty() )
      spec.missing_policy = parse_missing_token( config.missing_override );
   if( !config.subgroup_column.empty() )
      spec.subgroup_column = config.subgroup_column;
   return spec;
}

Dataset
load_dataset( const std::string& path, const ParsedSpec& spec )
{
   try
   {
      return encode_dataset( csv::read_file( path ), spec );
   }
   catch( const std::exception& e )
   {
      throw std::runtime_error( path + ": " + e.what() );
   }
}

Inputs
load_inputs( const RunConfig& config )
{
   Inputs in;
   in.spec = load_spec( config );
   in.indicators = in.spec.indicators;
   normalize_weights( in.indicators );
   if( config.data_paths.empty() )
      config_fail( "at least one data file is required" );
   for( const std::string& path : config.data_paths )
   {
      in.datasets.push_back( load_dataset( path, in.spec ) );
      in.labels.push_back( data_label( path ) );
   }
   return in;
}

/// Enforce the mode/data-path contract shared by the scoring subcommands.
void
validate_mode( const RunConfig& config )
{
   bool has_ref = !config.reference_path.empty();
   bool has_baseline = !config.baseline_paths.empty();
   switch( config.mode )
   {
   case RefMode::in_sample:
      if( config.data_paths.size() != 1 )
         config_fail( "in-sample mode scores exactly one data file" );
      if( has_ref || has_baseline )
         config_fail( "in-sample mode takes no reference or baseline" );
      break;
   case RefMode::pooled:
      if( config.data_paths.size() < 2 )
         config_fail( "pooled mode needs at least two data files" );
      if( has_ref || has_baseline )
         config_fail( "pooled mode takes no reference or baseline" );
      break;
   case RefMode::anchored:
      if( config.data_paths.size() != 1 )
         config_fail( "anchored mode scores exactly one data file" );
      if( has_ref == has_baseline )
         config_fail( "anchored mode needs exactly one of a reference "
                      "document or baseline data" );
      break;
   }
}

ReferenceDistribution
resolve_reference( const RunConfig& config, const Inputs& in )
{
   switch( config.mode )
   {
   case RefMode::in_sample:
      return fit_reference( in.datasets.front(), in.indicators,
                            RefMode::in_sample );
   case RefMode::pooled:
      return fit_reference_pooled( in.datasets, in.indicators,
                                   config.pooling );
   case RefMode::anchored:
      break;
   }
   if( !config.reference_path.empty() )
      return load_reference_file( config.reference_path );
   std::vector<Dataset> baselines;
   for( const std::string& path : config.baseline_paths )
      baselines.push_back( load_dataset( path, in.spec ) );
   if( baselines.size() == 1 )
      return fit_reference( baselines.front(), in.indicators,
                            RefMode::anchored );
   return fit_reference_pooled( baselines, in.indicators, config.pooling );
}

double
parse_k_token( const std::string& token,
               const std::vector<IndicatorSpec>& indicators )
{
   if( token == "union" )
      return union_cutoff( indicators );
   if( token == "intersection" )
      return intersection_cutoff();
   const char* begin = token.c_str();
   char* end = nullptr;
   double value = std::strtod( begin, &end );
   if( end == begin || *end != '\0' )
      config_fail( "cannot parse poverty cutoff '" + token + "'" );
   if( !( value > 0.0 ) || value > 1.0 )
      config_fail( "poverty cutoff " + token + " is outside (0, 1]" );
   return value;
}

double
single_k( const RunConfig& config,
          const std::vector<IndicatorSpec>& indicators )
{
   if( config.k_tokens.size() > 1 )
      config_fail( "this subcommand takes a single poverty cutoff" );
   return parse_k_token(
       config.k_tokens.empty() ? "union" : config.k_tokens.front(),
       indicators );
}

} // namespace

std::string
format_value( double v, bool pretty )
{
   char buf[40];
   std::snprintf( buf, sizeof( buf ), pretty ? "%.3f" : "%.17g", v );
   return buf;
}

std::vector<double>
resolve_k_grid( const std::vector<std::string>& tokens,
                const std::vector<IndicatorSpec>& indicators )
{
   static const std::vector<std::string> kDefault = {
       "union", "0.25", "0.33", "0.5", "0.67", "0.75", "1.0" };
   const std::vector<std::string>& use = tokens.empty() ? kDefault : tokens;
   std::vector<double> grid;
   for( const std::string& token : use )
      grid.push_back( parse_k_token( token, indicators ) );
   std::sort( grid.begin(), grid.end() );
   grid.erase( std::unique( grid.begin(), grid.end() ), grid.end() );
   return grid;
}

int
cmd_compute( const RunConfig& config )
{
   validate_mode( config );
   Inputs in = load_inputs( config );
   ReferenceDistribution ref = resolve_reference( config, in );
   std::vector<double> grid = resolve_k_grid( config.k_tokens,
                                              in.indicators );

   OutTable table;
   table.header = { "data",
                    "k",
                    "alpha",
                    "headcount",
                    "intensity",
                    "positional_gap",
                    "adjusted_headcount",
                    "adjusted_gap",
                    "adjusted_gap_alpha",
                    "af_gap_avg",
                    "af_adjusted_gap",
                    "warnings" };
   for( std::size_t d = 0; d < in.datasets.size(); ++d )
      for( double k : grid )
      {
         DeprivationProfile prof =
             build_profile( in.datasets[d], in.indicators, ref, k );
         MeasureReport rep =
             compute_measures( prof, in.indicators, config.alpha );
         std::vector<std::string> warnings = in.spec.warnings;
         warnings.insert( warnings.end(), in.datasets[d].notes.begin(),
                          in.datasets[d].notes.end() );
         warnings.insert( warnings.end(), rep.diagnostics.begin(),
                          rep.diagnostics.end() );
         table.add_row( { in.labels[d],
                          format_value( k, config.pretty ),
                          format_value( rep.alpha, config.pretty ),
                          format_value( rep.headcount, config.pretty ),
                          format_value( rep.intensity, config.pretty ),
                          format_value( rep.positional_gap, config.pretty ),
                          format_value( rep.adjusted_headcount,
                                        config.pretty ),
                          format_value( rep.adjusted_gap, config.pretty ),
                          format_value( rep.adjusted_gap_alpha,
                                        config.pretty ),
                          rep.af ? format_value( rep.af->gap_avg,
                                                 config.pretty )
                                 : std::string(),
                          rep.af ? format_value( rep.af->adjusted_gap,
                                                 config.pretty )
                                 : std::string(),
                          join_notes( warnings ) } );
      }
   emit( config, table.render( config ) );
   return exit_ok;
}

int
cmd_anchor( const RunConfig& config )
{
   if( config.out_path.empty() )
      config_fail( "anchor needs an output path for the reference "
                   "document" );
   Inputs in = load_inputs( config );
   ReferenceDistribution ref =
       in.datasets.size() == 1
           ? fit_reference( in.datasets.front(), in.indicators,
                            RefMode::anchored )
           : fit_reference_pooled( in.datasets, in.indicators,
                                   config.pooling );
   std::string path = resolve_out_path( config, config.out_path );
   save_reference_file( ref, path );
   std::cout << "reference written: " << path << "\n"
             << "fingerprint: " << ref.fingerprint << "\n"
             << "indicators: " << ref.columns.size() << "\n";
   for( const std::string& note : ref.notes )
      std::cout << "note: " << note << "\n";
   return exit_ok;
}

int
cmd_decompose( const RunConfig& config )
{
   if( config.per_subgroup_refs )
   {
      if( !config.allow_inconsistent )
         config_fail( "per-subgroup references break the decomposition "
                      "identity; pass --allow-inconsistent to proceed" );
      if( config.mode != RefMode::in_sample )
         config_fail( "per-subgroup references only make sense in "
                      "in-sample mode" );
   }
   validate_mode( config );
   if( config.mode == RefMode::pooled )
      config_fail( "decompose scores a single data file; anchor on pooled "
                   "data instead" );
   Inputs in = load_inputs( config );
   const Dataset& data = in.datasets.front();
   if( in.spec.subgroup_column.empty() )
      config_fail( "decompose needs a subgroup column (spec field or "
                   "--subgroup)" );
   if( !data.has_groups() )
      config_fail( "data has no subgroup labels for column '" +
                   in.spec.subgroup_column + "'" );
   double k = single_k( config, in.indicators );

   DecompositionReport rep;
   if( config.per_subgroup_refs )
      rep = decompose_with_subgroup_refs( data, in.indicators, k );
   else
      rep = decompose_by_subgroup( data, in.indicators,
                                   resolve_reference( config, in ), k );

   OutTable table;
   table.header = { "subgroup",       "weighted_share", "headcount",
                    "intensity",      "positional_gap", "adjusted_gap",
                    "contribution" };
   for( const SubgroupRow& row : rep.rows )
      table.add_row( { row.label,
                       format_value( row.weighted_share, config.pretty ),
                       format_value( row.headcount, config.pretty ),
                       format_value( row.intensity, config.pretty ),
                       format_value( row.positional_gap, config.pretty ),
                       format_value( row.adjusted_gap, config.pretty ),
                       format_value( row.contribution, config.pretty ) } );
   table.add_row( { "(total)", format_value( 1.0, config.pretty ), "", "",
                    "",
                    format_value( rep.total_adjusted_gap, config.pretty ),
                    "" } );
   table.add_row( { "(residual)", "", "", "", "",
                    format_value( rep.reconstruction_residual,
                                  config.pretty ),
                    "" } );

   std::string content = table.render( config );
   if( config.format == "text" && !rep.diagnostics.empty() )
   {
      content += "\n";
      for( const std::string& note : rep.diagnostics )
         content += "note: " + note + "\n";
   }
   emit( config, content );
   return exit_ok;
}

int
cmd_compare_af( const RunConfig& config )
{
   validate_mode( config );
   if( config.mode == RefMode::pooled )
      config_fail( "compare-af scores a single data file" );
   Inputs in = load_inputs( config );
   double k = single_k( config, in.indicators );
   DeprivationProfile prof = build_profile(
       in.datasets.front(), in.indicators, resolve_reference( config, in ),
       k );
   ConcordanceReport rep =
       rank_concordance( prof, in.indicators, config.bin_width );

   OutTable summary;
   summary.header = { "poor_rows", "weighted_poor", "pearson",
                      "spearman",  "kendall_tau_b", "bin_width" };
   summary.add_row( { std::to_string( rep.poor_rows.size() ),
                      format_value( rep.weighted_poor, config.pretty ),
                      format_value( rep.pearson, config.pretty ),
                      format_value( rep.spearman, config.pretty ),
                      format_value( rep.tau_b, config.pretty ),
                      format_value( rep.bin_width, config.pretty ) } );
   emit( config, summary.render( config ) );

   if( !config.scatter_out.empty() )
   {
      OutTable scatter;
      scatter.header = { "row",       "weight",     "depth_score",
                         "gap_score", "depth_rank", "gap_rank" };
      for( std::size_t i = 0; i < rep.poor_rows.size(); ++i )
         scatter.add_row(
             { std::to_string( rep.poor_rows[i] ),
               format_value( prof.weight[rep.poor_rows[i]],
                             config.pretty ),
               format_value( rep.depth_score[i], config.pretty ),
               format_value( rep.gap_score[i], config.pretty ),
               format_value( rep.depth_rank[i], config.pretty ),
               format_value( rep.gap_rank[i], config.pretty ) } );
      write_text_file( resolve_out_path( config, config.scatter_out ),
                       scatter.to_csv() );
   }
   if( !config.hist_out.empty() )
   {
      OutTable hist;
      hist.header = { "bin_lo", "bin_hi", "weighted_share", "count" };
      for( const ConcordanceReport::Bin& bin : rep.rank_difference_hist )
         hist.add_row( { format_value( bin.lo, config.pretty ),
                         format_value( bin.hi, config.pretty ),
                         format_value( bin.weighted_share, config.pretty ),
                         std::to_string( bin.count ) } );
      write_text_file( resolve_out_path( config, config.hist_out ),
                       hist.to_csv() );
   }
   return exit_ok;
}

int
cmd_scatter( const RunConfig& config )
{
   validate_mode( config );
   if( config.mode == RefMode::pooled )
      config_fail( "scatter scores a single data file" );
   Inputs in = load_inputs( config );
   double k = single_k( config, in.indicators );
   const Dataset& data = in.datasets.front();
   DeprivationProfile prof = build_profile(
       data, in.indicators, resolve_reference( config, in ), k );
   PositionalGapResult depth = positional_gap( prof );
   IntensityResult share = intensity( prof );

   OutTable table;
   table.header = { "row", "weight", "subgroup", "deprivation_share",
                    "positional_gap" };
   for( std::size_t i = 0; i < prof.rows; ++i )
   {
      if( !prof.is_poor( i ) )
         continue;
      table.add_row(
          { std::to_string( i ),
            format_value( prof.weight[i], config.pretty ),
            data.has_groups() ? data.group[i] : std::string(),
            format_value( share.person[i], config.pretty ),
            format_value( depth.person[i], config.pretty ) } );
   }
   emit( config, table.render( config ) );
   return exit_ok;
}

int
cmd_axioms( const RunConfig& config )
{
   lab::GridReport report;
   if( config.lab_mode_filter.empty() )
   {
      report = lab::run_axiom_grid( config.lab );
   }
   else
   {
      lab::RefPolicy mode;
      if( config.lab_mode_filter == "anchored" )
         mode = lab::RefPolicy::anchored;
      else if( config.lab_mode_filter == "in-sample" ||
               config.lab_mode_filter == "in_sample" )
         mode = lab::RefPolicy::in_sample;
      else
         config_fail( "unknown mode filter '" + config.lab_mode_filter +
                      "' (expected anchored or in-sample)" );
      report.options = config.lab;
      report.all_confirmed = true;
      for( lab::Axiom a : lab::kAllAxioms )
      {
         report.cells.push_back( lab::check_axiom( a, mode, config.lab ) );
         report.all_confirmed =
             report.all_confirmed &&
             report.cells.back().outcome == lab::Outcome::confirmed;
      }
   }

   emit( config, lab::grid_report_text( report ) );
   if( !config.report_path.empty() )
      write_text_file( resolve_out_path( config, config.report_path ),
                       lab::grid_report_json( report ) );

   bool any_violated = false;
   bool any_inconclusive = false;
   for( const lab::CheckResult& cell : report.cells )
   {
      any_violated = any_violated || cell.outcome == lab::Outcome::violated;
      any_inconclusive =
          any_inconclusive || cell.outcome == lab::Outcome::inconclusive;
   }
   if( any_violated )
      return exit_grid_mismatch;
   if( any_inconclusive )
      return exit_inconclusive;
   return exit_ok;
}

} // namespace ppg::run
