#include "ppg/run.hpp"

#include "ppg/csv.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

using namespace ppg;
using namespace ppg::run;

namespace
{

const std::string kData = PPG_TEST_DATA_DIR;

bool
close( double a, double b )
{
   return std::fabs( a - b ) <= 1e-12;
}

std::string
slurp( const std::string& path )
{
   std::ifstream in( path, std::ios::binary );
   REQUIRE( in.good() );
   std::ostringstream buf;
   buf << in.rdbuf();
   return buf.str();
}

double
cell_number( const csv::Table& table, std::size_t row,
             const std::string& column )
{
   auto col = table.column( column );
   REQUIRE( col.has_value() );
   const std::string& cell = table.rows[row][*col];
   char* end = nullptr;
   double v = std::strtod( cell.c_str(), &end );
   REQUIRE( end == cell.c_str() + cell.size() );
   return v;
}

std::vector<IndicatorSpec>
two_indicators( double wa, double wb )
{
   ParsedSpec spec = parse_spec_file( kData + "/mixed_spec.json" );
   spec.indicators[0].weight = wa;
   spec.indicators[1].weight = wb;
   return spec.indicators;
}

struct TempFile
{
   std::string path;

   explicit TempFile( std::string name ) : path( std::move( name ) ) {}

   ~TempFile()
   {
      std::remove( path.c_str() );
   }
};

RunConfig
mixed_config()
{
   RunConfig config;
   config.spec_path = kData + "/mixed_spec.json";
   config.data_paths = { kData + "/mixed.csv" };
   return config;
}

} // namespace

TEST_CASE( "k grid resolution" )
{
   std::vector<IndicatorSpec> inds = two_indicators( 0.5, 0.5 );

   // The default grid dedupes union (here 0.5) against its fixed stops.
   std::vector<double> grid = resolve_k_grid( {}, inds );
   CHECK( grid == std::vector<double>{ 0.25, 0.33, 0.5, 0.67, 0.75, 1.0 } );

   CHECK( resolve_k_grid( { "union" }, inds ) ==
          std::vector<double>{ 0.5 } );
   CHECK( resolve_k_grid( { "intersection" }, inds ) ==
          std::vector<double>{ 1.0 } );
   CHECK( resolve_k_grid( { "0.3", "union", "0.3" }, inds ) ==
          std::vector<double>{ 0.3, 0.5 } );

   std::vector<IndicatorSpec> lopsided = two_indicators( 0.2, 0.8 );
   CHECK( resolve_k_grid( { "union" }, lopsided ) ==
          std::vector<double>{ 0.2 } );

   CHECK_THROWS_AS( resolve_k_grid( { "0" }, inds ), std::runtime_error );
   CHECK_THROWS_AS( resolve_k_grid( { "1.5" }, inds ), std::runtime_error );
   CHECK_THROWS_AS( resolve_k_grid( { "abc" }, inds ), std::runtime_error );
   CHECK_THROWS_AS( resolve_k_grid( { "0.5x" }, inds ), std::runtime_error );
}

TEST_CASE( "value formatting" )
{
   CHECK( format_value( 7.0 / 12.0, true ) == "0.583" );
   CHECK( format_value( 0.5, true ) == "0.500" );
   CHECK( format_value( 0.75, false ) == "0.75" );

   // Full-precision output round-trips exactly.
   for( double v : { 7.0 / 12.0, 14.0 / 15.0, 1.0 / 3.0, 1e-9 } )
   {
      std::string text = format_value( v, false );
      CHECK( std::strtod( text.c_str(), nullptr ) == v );
   }
}

TEST_CASE( "compute writes the measure table over the k grid" )
{
   TempFile out( "run_compute_test.csv" );
   RunConfig config = mixed_config();
   config.k_tokens = { "0.5", "1" };
   config.out_path = out.path;
   REQUIRE( cmd_compute( config ) == exit_ok );

   csv::Table table = csv::parse( slurp( out.path ) );
   REQUIRE( table.rows.size() == 2 );
   CHECK( table.header[0] == "data" );
   CHECK( table.rows[0][0] == "mixed.csv" );

   CHECK( cell_number( table, 0, "k" ) == 0.5 );
   CHECK( cell_number( table, 0, "alpha" ) == 1.0 );
   CHECK( cell_number( table, 0, "headcount" ) == 0.75 );
   CHECK( close( cell_number( table, 0, "intensity" ), 5.0 / 6.0 ) );
   CHECK( close( cell_number( table, 0, "positional_gap" ), 14.0 / 15.0 ) );
   CHECK( close( cell_number( table, 0, "adjusted_gap" ), 7.0 / 12.0 ) );
   CHECK( cell_number( table, 1, "k" ) == 1.0 );
   CHECK( close( cell_number( table, 1, "adjusted_gap" ), 11.0 / 24.0 ) );

   // Ordinal indicators leave the cutoff-gap columns empty.
   CHECK( table.rows[0][*table.column( "af_gap_avg" )] == "" );
   CHECK( table.rows[0][*table.column( "af_adjusted_gap" )] == "" );
}

TEST_CASE( "anchor then compute reproduces the in-sample run exactly" )
{
   TempFile ref( "run_anchor_ref.json" );
   TempFile plain( "run_insample.csv" );
   TempFile anchored( "run_anchored.csv" );

   RunConfig fit = mixed_config();
   fit.out_path = ref.path;
   REQUIRE( cmd_anchor( fit ) == exit_ok );
   CHECK( load_reference_file( ref.path ).mode == RefMode::anchored );

   RunConfig in_sample = mixed_config();
   in_sample.k_tokens = { "0.5", "0.75", "1" };
   in_sample.out_path = plain.path;
   REQUIRE( cmd_compute( in_sample ) == exit_ok );

   RunConfig rescored = mixed_config();
   rescored.mode = RefMode::anchored;
   rescored.reference_path = ref.path;
   rescored.k_tokens = { "0.5", "0.75", "1" };
   rescored.out_path = anchored.path;
   REQUIRE( cmd_compute( rescored ) == exit_ok );

   // Anchoring to the same year's own distribution and refitting in-sample
   // are the same evaluation, bit for bit, through the document round trip.
   CHECK( slurp( plain.path ) == slurp( anchored.path ) );
}

TEST_CASE( "decompose emits subgroup, total and residual rows" )
{
   TempFile out( "run_decompose_test.csv" );
   RunConfig config = mixed_config();
   config.k_tokens = { "0.5" };
   config.out_path = out.path;
   REQUIRE( cmd_decompose( config ) == exit_ok );

   csv::Table table = csv::parse( slurp( out.path ) );
   REQUIRE( table.rows.size() == 4 );
   CHECK( table.rows[0][0] == "north" );
   CHECK( table.rows[1][0] == "south" );
   CHECK( table.rows[2][0] == "(total)" );
   CHECK( table.rows[3][0] == "(residual)" );

   CHECK( close( cell_number( table, 0, "adjusted_gap" ), 11.0 / 12.0 ) );
   CHECK( close( cell_number( table, 0, "contribution" ), 11.0 / 14.0 ) );
   CHECK( close( cell_number( table, 1, "contribution" ), 3.0 / 14.0 ) );
   CHECK( close( cell_number( table, 2, "adjusted_gap" ), 7.0 / 12.0 ) );
   CHECK( std::fabs( cell_number( table, 3, "adjusted_gap" ) ) <= 1e-12 );
}

TEST_CASE( "deliberately inconsistent decomposition needs the consent flag" )
{
   TempFile out( "run_decompose_refs_test.csv" );
   RunConfig config = mixed_config();
   config.k_tokens = { "0.5" };
   config.out_path = out.path;
   config.per_subgroup_refs = true;
   CHECK_THROWS_AS( cmd_decompose( config ), std::runtime_error );

   config.allow_inconsistent = true;
   REQUIRE( cmd_decompose( config ) == exit_ok );
   csv::Table table = csv::parse( slurp( out.path ) );
   REQUIRE( table.rows.size() == 4 );
   // Scoring each region against its own ladder misses the population
   // index by 1/12.
   CHECK( cell_number( table, 3, "adjusted_gap" ) ==
          doctest::Approx( -1.0 / 12.0 ).epsilon( 1e-12 ) );
}

TEST_CASE( "rank comparison summary, scatter and histogram files" )
{
   TempFile out( "run_compare_test.csv" );
   TempFile scatter( "run_compare_scatter.csv" );
   TempFile hist( "run_compare_hist.csv" );

   RunConfig config;
   config.spec_path = kData + "/cardinal_spec.json";
   config.data_paths = { kData + "/cardinal.csv" };
   config.k_tokens = { "union" };
   config.out_path = out.path;
   config.scatter_out = scatter.path;
   config.hist_out = hist.path;
   config.bin_width = 0.25;
   REQUIRE( cmd_compare_af( config ) == exit_ok );

   csv::Table summary = csv::parse( slurp( out.path ) );
   REQUIRE( summary.rows.size() == 1 );
   CHECK( cell_number( summary, 0, "poor_rows" ) == 5.0 );
   CHECK( std::fabs( cell_number( summary, 0, "pearson" ) ) <= 1.0 );
   CHECK( std::fabs( cell_number( summary, 0, "spearman" ) ) <= 1.0 );
   CHECK( std::fabs( cell_number( summary, 0, "kendall_tau_b" ) ) <= 1.0 );

   csv::Table points = csv::parse( slurp( scatter.path ) );
   REQUIRE( points.rows.size() == 5 );
   for( std::size_t i = 0; i < points.rows.size(); ++i )
   {
      double depth_rank = cell_number( points, i, "depth_rank" );
      CHECK( depth_rank >= 0.0 );
      CHECK( depth_rank <= 1.0 );
   }

   csv::Table bins = csv::parse( slurp( hist.path ) );
   double share = 0.0;
   for( std::size_t i = 0; i < bins.rows.size(); ++i )
      share += cell_number( bins, i, "weighted_share" );
   CHECK( share == doctest::Approx( 1.0 ).epsilon( 1e-12 ) );
}

TEST_CASE( "scatter lists the poor with share and positional gap" )
{
   TempFile out( "run_scatter_test.csv" );
   RunConfig config = mixed_config();
   config.k_tokens = { "0.5" };
   config.out_path = out.path;
   REQUIRE( cmd_scatter( config ) == exit_ok );

   csv::Table table = csv::parse( slurp( out.path ) );
   REQUIRE( table.rows.size() == 3 ); // three poor rows at k = 0.5
   CHECK( cell_number( table, 0, "deprivation_share" ) == 1.0 );
   CHECK( cell_number( table, 2, "positional_gap" ) == 1.0 );
   CHECK( table.rows[0][*table.column( "subgroup" )] == "north" );
}

TEST_CASE( "text format renders aligned tables" )
{
   TempFile out( "run_text_test.txt" );
   RunConfig config = mixed_config();
   config.k_tokens = { "0.5" };
   config.format = "text";
   config.pretty = true;
   config.out_path = out.path;
   REQUIRE( cmd_compute( config ) == exit_ok );
   std::string text = slurp( out.path );
   CHECK( text.find( "headcount" ) != std::string::npos );
   CHECK( text.find( "0.583" ) != std::string::npos );
   // The table itself is space-aligned, not comma-delimited (free-text
   // diagnostics may still contain prose commas).
   std::string header_line = text.substr( 0, text.find( '\n' ) );
   CHECK( header_line.find( ',' ) == std::string::npos );
   CHECK( header_line.find( "  " ) != std::string::npos );
}

TEST_CASE( "mode validation rejects inconsistent configurations" )
{
   // Anchored without a reference (or with two sources of one).
   RunConfig config = mixed_config();
   config.mode = RefMode::anchored;
   CHECK_THROWS_AS( cmd_compute( config ), std::runtime_error );

   config.reference_path = "somewhere.json";
   config.baseline_paths = { kData + "/mixed.csv" };
   CHECK_THROWS_AS( cmd_compute( config ), std::runtime_error );

   // In-sample with anchored leftovers.
   RunConfig stray = mixed_config();
   stray.reference_path = "somewhere.json";
   CHECK_THROWS_AS( cmd_compute( stray ), std::runtime_error );

   // Pooled needs at least two datasets.
   RunConfig pooled = mixed_config();
   pooled.mode = RefMode::pooled;
   CHECK_THROWS_AS( cmd_compute( pooled ), std::runtime_error );

   // Unknown output format.
   RunConfig fmt = mixed_config();
   fmt.format = "xml";
   CHECK_THROWS_AS( cmd_compute( fmt ), std::runtime_error );

   // Errors carry the config prefix.
   try
   {
      RunConfig bad = mixed_config();
      bad.mode = RefMode::anchored;
      cmd_compute( bad );
      CHECK( false );
   }
   catch( const std::runtime_error& e )
   {
      CHECK( std::string( e.what() ).find( "config:" ) !=
             std::string::npos );
   }
}

TEST_CASE( "pooled mode fits one reference across several files" )
{
   TempFile out( "run_pooled_test.csv" );
   RunConfig config = mixed_config();
   config.data_paths = { kData + "/mixed.csv", kData + "/mixed.csv" };
   config.mode = RefMode::pooled;
   config.k_tokens = { "0.5" };
   config.out_path = out.path;
   REQUIRE( cmd_compute( config ) == exit_ok );

   csv::Table table = csv::parse( slurp( out.path ) );
   REQUIRE( table.rows.size() == 2 ); // one row per dataset
   // Pooling a dataset with itself reproduces the in-sample numbers.
   CHECK( close( cell_number( table, 0, "adjusted_gap" ), 7.0 / 12.0 ) );
   CHECK( close( cell_number( table, 1, "adjusted_gap" ), 7.0 / 12.0 ) );
   // Same pooled reference, same rows: the two lines must agree verbatim.
   CHECK( table.rows[0][*table.column( "adjusted_gap" )] ==
          table.rows[1][*table.column( "adjusted_gap" )] );
}

TEST_CASE( "relative outputs land in the configured directory" )
{
   namespace fs = std::filesystem;
   fs::create_directories( "run_out_dir_test" );
   RunConfig config = mixed_config();
   config.k_tokens = { "0.5" };
   config.out_dir = "run_out_dir_test";
   config.out_path = "nested.csv";
   REQUIRE( cmd_compute( config ) == exit_ok );
   CHECK( fs::exists( "run_out_dir_test/nested.csv" ) );
   fs::remove_all( "run_out_dir_test" );
}
