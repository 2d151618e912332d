#include "ppg/indicator_model.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <stdexcept>
#include <string>

using namespace ppg;

namespace
{

std::string
parse_error( const std::string& text )
{
   try
   {
      parse_spec( text );
   }
   catch( const std::runtime_error& e )
   {
      return e.what();
   }
   return "";
}

const char* const kTwoIndicatorSpec = R"({
  "indicators": [
    {
      "name": "housing",
      "source_column": "house",
      "kind": "ordinal",
      "categories": ["crowded", ["tight", "cramped"], "adequate", "spacious"],
      "cutoff_z": 2,
      "weight_w": 1
    },
    {
      "name": "income",
      "kind": "cardinal",
      "cutoff_z": 100,
      "weight_w": 3
    }
  ],
  "survey_weight_column": "wt",
  "subgroup_column": "region",
  "missing_policy": "error"
})";

} // namespace

TEST_CASE( "spec parsing: names, categories, weights, document columns" )
{
   ParsedSpec spec = parse_spec( kTwoIndicatorSpec );
   REQUIRE( spec.indicators.size() == 2 );

   const IndicatorSpec& housing = spec.indicators[0];
   CHECK( housing.name == "housing" );
   CHECK( housing.source_column == "house" );
   CHECK( housing.kind == IndicatorKind::ordinal );
   REQUIRE( housing.categories.size() == 4 );
   CHECK( housing.categories[1].labels.size() == 2 );
   CHECK( housing.categories[1].labels[1] == "cramped" );
   CHECK( housing.cutoff == 2.0 );

   const IndicatorSpec& income = spec.indicators[1];
   CHECK( income.source_column == "income" ); // defaults to the name
   CHECK( income.kind == IndicatorKind::cardinal );
   CHECK( income.cutoff == 100.0 );

   // Raw weights 1 and 3 come back normalized.
   CHECK( housing.weight == doctest::Approx( 0.25 ).epsilon( 1e-15 ) );
   CHECK( income.weight == doctest::Approx( 0.75 ).epsilon( 1e-15 ) );

   CHECK( spec.survey_weight_column == "wt" );
   CHECK( spec.subgroup_column == "region" );
   CHECK( spec.missing_policy == MissingPolicy::error );
}

TEST_CASE( "spec parsing: lower-is-better flips the encoded cutoff" )
{
   ParsedSpec spec = parse_spec( R"({
     "indicators": [
       { "name": "pollution", "kind": "cardinal", "cutoff_z": 10,
         "weight_w": 1, "direction": "lower-is-better" }
     ]
   })" );
   CHECK( spec.indicators[0].direction == Direction::lower_is_better );
   CHECK( spec.indicators[0].cutoff == -10.0 );
}

TEST_CASE( "spec parsing rejects malformed documents" )
{
   CHECK( parse_error( "{" ) != "" );
   CHECK( parse_error( R"({"indicators": []})" ) != "" );

   // Cutoff outside the category code range.
   CHECK( parse_error( R"({"indicators": [
     {"name": "a", "kind": "ordinal", "categories": ["x","y"],
      "cutoff_z": 2, "weight_w": 1}]})" )
              .find( "cutoff_z" ) != std::string::npos );

   // Nonpositive weight.
   CHECK( parse_error( R"({"indicators": [
     {"name": "a", "kind": "ordinal", "categories": ["x","y"],
      "cutoff_z": 1, "weight_w": 0}]})" )
              .find( "weight_w" ) != std::string::npos );

   // Direction on an ordinal indicator.
   CHECK( parse_error( R"({"indicators": [
     {"name": "a", "kind": "ordinal", "categories": ["x","y"],
      "cutoff_z": 1, "weight_w": 1, "direction": "lower-is-better"}]})" )
              .find( "direction" ) != std::string::npos );

   // Duplicate category label.
   CHECK( parse_error( R"({"indicators": [
     {"name": "a", "kind": "ordinal", "categories": ["x","x"],
      "cutoff_z": 1, "weight_w": 1}]})" )
              .find( "duplicate" ) != std::string::npos );

   // Unknown keys anywhere.
   CHECK( parse_error( R"({"indicators": [
     {"name": "a", "kind": "ordinal", "categories": ["x","y"],
      "cutoff_z": 1, "weight_w": 1, "shoe_size": 43}]})" ) != "" );
   CHECK( parse_error( R"({"indicators": [
     {"name": "a", "kind": "ordinal", "categories": ["x","y"],
      "cutoff_z": 1, "weight_w": 1}], "extra": true})" ) != "" );

   // Bad missing policy token.
   CHECK( parse_error( R"({"indicators": [
     {"name": "a", "kind": "ordinal", "categories": ["x","y"],
      "cutoff_z": 1, "weight_w": 1}], "missing_policy": "ignore"})" ) != "" );
}

TEST_CASE( "normalize_weights is idempotent and rejects zero mass" )
{
   std::vector<IndicatorSpec> specs;
   specs.push_back( test::ordinal_indicator( "a", 2, 1.0, 2.0 ) );
   specs.push_back( test::ordinal_indicator( "b", 2, 1.0, 6.0 ) );
   normalize_weights( specs );
   CHECK( specs[0].weight == doctest::Approx( 0.25 ).epsilon( 1e-15 ) );
   normalize_weights( specs );
   CHECK( specs[0].weight == doctest::Approx( 0.25 ).epsilon( 1e-15 ) );
}

TEST_CASE( "encoding: labels to codes, weights, subgroups, negation" )
{
   ParsedSpec spec = parse_spec( kTwoIndicatorSpec );
   csv::Table table = csv::parse( "house,income,wt,region\n"
                                  "crowded,50,2,north\n"
                                  "cramped,150,1,south\n"
                                  "spacious,80,1.5,south\n" );
   Dataset data = encode_dataset( table, spec );
   REQUIRE( data.rows == 3 );
   REQUIRE( data.cols == 2 );
   CHECK( data.at( 0, 0 ) == 0.0 );
   CHECK( data.at( 1, 0 ) == 1.0 ); // alias label collapses onto code 1
   CHECK( data.at( 2, 0 ) == 3.0 );
   CHECK( data.at( 1, 1 ) == 150.0 );
   CHECK( data.weight[0] == 2.0 );
   CHECK( data.weight[2] == 1.5 );
   REQUIRE( data.has_groups() );
   CHECK( data.group[0] == "north" );
   CHECK( data.total_weight() == 4.5 );
   CHECK( !data.has_missing() );
}

TEST_CASE( "encoding: lower-is-better values are negated" )
{
   ParsedSpec spec = parse_spec( R"({
     "indicators": [
       { "name": "pollution", "kind": "cardinal", "cutoff_z": 10,
         "weight_w": 1, "direction": "lower-is-better" }
     ]
   })" );
   csv::Table table = csv::parse( "pollution\n12\n8\n" );
   Dataset data = encode_dataset( table, spec );
   CHECK( data.at( 0, 0 ) == -12.0 );
   CHECK( data.at( 1, 0 ) == -8.0 );
   // Deprived means value < cutoff on the encoded scale: the high-pollution
   // row is fine (-12 < -10 is true, so it IS deprived) and the low one not.
   CHECK( ( data.at( 0, 0 ) < spec.indicators[0].cutoff ) );
   CHECK( !( data.at( 1, 0 ) < spec.indicators[0].cutoff ) );
}

TEST_CASE( "encoding errors name the row and indicator" )
{
   ParsedSpec spec = parse_spec( kTwoIndicatorSpec );
   csv::Table bad_label = csv::parse( "house,income,wt,region\n"
                                      "mansion,50,1,north\n" );
   try
   {
      encode_dataset( bad_label, spec );
      CHECK( false );
   }
   catch( const std::runtime_error& e )
   {
      std::string msg = e.what();
      CHECK( msg.find( "row 1" ) != std::string::npos );
      CHECK( msg.find( "housing" ) != std::string::npos );
      CHECK( msg.find( "mansion" ) != std::string::npos );
   }

   csv::Table bad_weight = csv::parse( "house,income,wt,region\n"
                                       "crowded,50,-1,north\n" );
   CHECK_THROWS_AS( encode_dataset( bad_weight, spec ), std::runtime_error );

   csv::Table bad_number = csv::parse( "house,income,wt,region\n"
                                       "crowded,lots,1,north\n" );
   CHECK_THROWS_AS( encode_dataset( bad_number, spec ), std::runtime_error );
}

TEST_CASE( "missing policy: error" )
{
   ParsedSpec spec = parse_spec( kTwoIndicatorSpec );
   csv::Table table = csv::parse( "house,income,wt,region\n"
                                  "crowded,NA,1,north\n" );
   try
   {
      encode_dataset( table, spec );
      CHECK( false );
   }
   catch( const std::runtime_error& e )
   {
      std::string msg = e.what();
      CHECK( msg.find( "row 1" ) != std::string::npos );
      CHECK( msg.find( "income" ) != std::string::npos );
   }
}

TEST_CASE( "missing policy: drop-row keeps the rest and notes the drop" )
{
   ParsedSpec spec = parse_spec( kTwoIndicatorSpec );
   spec.missing_policy = MissingPolicy::drop_row;
   csv::Table table = csv::parse( "house,income,wt,region\n"
                                  "crowded,NA,1,north\n"
                                  "adequate,120,2,south\n" );
   Dataset data = encode_dataset( table, spec );
   REQUIRE( data.rows == 1 );
   CHECK( data.at( 0, 0 ) == 2.0 );
   CHECK( data.weight[0] == 2.0 );
   REQUIRE( data.notes.size() == 1 );
   CHECK( data.notes[0].find( "dropped 1" ) != std::string::npos );
}

TEST_CASE( "missing policy: treat-as-most-deprived imputes worst values" )
{
   ParsedSpec spec = parse_spec( kTwoIndicatorSpec );
   spec.missing_policy = MissingPolicy::most_deprived;
   csv::Table table = csv::parse( "house,income,wt,region\n"
                                  ",NA,1,\n"
                                  "adequate,120,2,south\n"
                                  "spacious,60,1,south\n" );
   Dataset data = encode_dataset( table, spec );
   REQUIRE( data.rows == 3 );
   CHECK( data.at( 0, 0 ) == 0.0 );  // ordinal: worst category
   CHECK( data.at( 0, 1 ) == 60.0 ); // cardinal: observed encoded minimum
   CHECK( data.group[0] == "(missing)" );
   CHECK( !data.has_missing() );
   REQUIRE( !data.notes.empty() );
   CHECK( data.notes[0].find( "imputed 2" ) != std::string::npos );
}

TEST_CASE( "dataset subset and validation" )
{
   Dataset data = test::demo_dataset();
   Dataset pick = data.subset( { 2, 0 } );
   REQUIRE( pick.rows == 2 );
   CHECK( pick.at( 0, 0 ) == 2.0 );
   CHECK( pick.at( 1, 0 ) == 0.0 );
   CHECK( pick.group[0] == "south" );

   Dataset broken = test::demo_dataset();
   broken.weight[1] = 0.0;
   CHECK_THROWS_AS( broken.validate(), std::runtime_error );

   Dataset ragged = test::demo_dataset();
   ragged.values.pop_back();
   CHECK_THROWS_AS( ragged.validate(), std::runtime_error );
}

TEST_CASE( "concatenate stacks rows and rejects column mismatches" )
{
   Dataset a = test::make_dataset( 1, 2, { 0.0, 1.0 } );
   Dataset b = test::make_dataset( 2, 2, { 2.0, 3.0, 1.0, 0.0 } );
   Dataset joined = concatenate( { a, b } );
   REQUIRE( joined.rows == 3 );
   CHECK( joined.at( 2, 1 ) == 0.0 );

   Dataset c = test::make_dataset( 1, 1, { 0.0 } );
   CHECK_THROWS_AS( concatenate( { a, c } ), std::runtime_error );
}

TEST_CASE( "spec file fixture loads" )
{
   ParsedSpec spec = parse_spec_file( std::string( PPG_TEST_DATA_DIR ) +
                                      "/mixed_spec.json" );
   REQUIRE( spec.indicators.size() == 2 );
   CHECK( spec.indicators[0].name == "housing" );
   CHECK( spec.indicators[1].is_binary() );
   CHECK( spec.survey_weight_column == "wt" );
   CHECK( spec.subgroup_column == "region" );
}
