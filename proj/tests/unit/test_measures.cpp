#include "ppg/measures.hpp"

#include "helpers.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace ppg;

namespace
{

struct DemoFixture
{
   Dataset data = test::demo_dataset();
   std::vector<IndicatorSpec> specs = test::demo_specs();
   ReferenceDistribution ref =
       fit_reference( data, specs, RefMode::in_sample );

   DeprivationProfile
   profile( double k ) const
   {
      return build_profile( data, specs, ref, k );
   }
};

constexpr double kTol = 1e-12;

bool
close( double a, double b )
{
   return std::fabs( a - b ) <= kTol;
}

} // namespace

TEST_CASE( "demo population at k = 0.5, worked by hand" )
{
   DemoFixture fix;
   DeprivationProfile prof = fix.profile( 0.5 );

   CHECK( headcount( prof ) == 0.75 );

   IntensityResult a = intensity( prof );
   CHECK( close( a.value, 5.0 / 6.0 ) );
   CHECK( close( a.person[0], 1.0 ) );
   CHECK( close( a.person[1], 1.0 ) );
   CHECK( close( a.person[2], 0.5 ) );
   CHECK( a.person[3] == 0.0 );

   PositionalGapResult s = positional_gap( prof );
   CHECK( close( s.value, 14.0 / 15.0 ) );
   CHECK( close( s.person[0], 1.0 ) );
   CHECK( close( s.person[1], 5.0 / 6.0 ) );
   CHECK( close( s.person[2], 1.0 ) );
   CHECK( s.person[3] == 0.0 );

   AdjustedIndexResult p = adjusted_index( prof );
   CHECK( close( p.value, 7.0 / 12.0 ) );
   CHECK( close( p.person[0], 1.0 ) );
   CHECK( close( p.person[1], 5.0 / 6.0 ) );
   CHECK( close( p.person[2], 0.5 ) );
   CHECK( p.person[3] == 0.0 );

   // The product identity H * A * S = P.
   CHECK( close( headcount( prof ) * a.value * s.value, p.value ) );
}

TEST_CASE( "demo population at k = 1 censors the single-deprivation row" )
{
   DemoFixture fix;
   DeprivationProfile prof = fix.profile( 1.0 );
   CHECK( headcount( prof ) == 0.5 );
   CHECK( intensity( prof ).value == 1.0 );
   CHECK( close( positional_gap( prof ).value, 11.0 / 12.0 ) );
   CHECK( close( adjusted_index( prof ).value, 11.0 / 24.0 ) );
}

TEST_CASE( "alpha weighting deepens the depth emphasis" )
{
   DemoFixture fix;
   DeprivationProfile prof = fix.profile( 0.5 );

   AdjustedIndexResult p1 = adjusted_index( prof, 1.0 );
   CHECK( p1.value_alpha == p1.value ); // alpha = 1 short-circuits

   AdjustedIndexResult p2 = adjusted_index( prof, 2.0 );
   CHECK( p2.value == p1.value ); // the unweighted index rides along
   CHECK( close( p2.value_alpha, 5.0 / 9.0 ) );

   // Squaring shrinks every interior depth, so the index must drop.
   CHECK( p2.value_alpha < p2.value );

   MeasureReport rep = compute_measures( prof, fix.specs, 2.0 );
   CHECK( rep.alpha == 2.0 );
   CHECK( close( rep.adjusted_gap_alpha, 5.0 / 9.0 ) );
}

TEST_CASE( "nobody poor yields zeros, not NaNs" )
{
   std::vector<IndicatorSpec> specs = { test::ordinal_indicator(
       "v", 4, 2.0, 1.0 ) };
   Dataset data = test::make_dataset( 3, 1, { 2.0, 3.0, 2.0 } );
   ReferenceDistribution ref =
       fit_reference( data, specs, RefMode::in_sample );
   DeprivationProfile prof = build_profile( data, specs, ref, 1.0 );

   CHECK( headcount( prof ) == 0.0 );
   CHECK( intensity( prof ).value == 0.0 );
   CHECK( positional_gap( prof ).value == 0.0 );
   CHECK( adjusted_index( prof ).value == 0.0 );

   MeasureReport rep = compute_measures( prof, specs );
   CHECK( rep.adjusted_gap == 0.0 );
   CHECK( std::isfinite( rep.positional_gap ) );
}

TEST_CASE( "survey weights drive every aggregate" )
{
   // Double the weight of the deepest row and the index must rise.
   Dataset data = test::demo_dataset();
   std::vector<IndicatorSpec> specs = test::demo_specs();
   Dataset heavy = data;
   heavy.weight[0] = 2.0;

   ReferenceDistribution ref_a =
       fit_reference( data, specs, RefMode::in_sample );
   ReferenceDistribution ref_b =
       fit_reference( heavy, specs, RefMode::in_sample );
   double p_a = adjusted_index( build_profile( data, specs, ref_a, 0.5 ) )
                    .value;
   double p_b = adjusted_index( build_profile( heavy, specs, ref_b, 0.5 ) )
                    .value;
   CHECK( p_b > p_a );

   // Weighted totals follow the weights.
   DeprivationProfile prof = build_profile( heavy, specs, ref_b, 0.5 );
   CHECK( prof.weighted_total == 5.0 );
   CHECK( prof.weighted_poor == 4.0 );
}

TEST_CASE( "classic gap block on an all-cardinal profile" )
{
   std::vector<IndicatorSpec> specs;
   specs.push_back( test::cardinal_indicator( "income", 100.0, 0.5 ) );
   specs.push_back( test::cardinal_indicator( "school", 8.0, 0.5 ) );
   Dataset data = test::make_dataset( 2, 2,
                                      { 40.0, 2.0, //
                                        150.0, 10.0 } );
   ReferenceDistribution ref =
       fit_reference( data, specs, RefMode::in_sample );
   DeprivationProfile prof = build_profile( data, specs, ref, 0.5 );

   AfBlock block = af_block( prof, specs );
   CHECK( close( block.gap_avg, 0.675 ) ); // mean of 0.6 and 0.75
   CHECK( close( block.adjusted_headcount, 0.5 ) );
   CHECK( close( block.adjusted_gap, 0.3375 ) );

   std::vector<double> gap = af_gap_per_person( prof, specs );
   CHECK( close( gap[0], 0.675 ) );
   CHECK( gap[1] == 0.0 );

   MeasureReport rep = compute_measures( prof, specs );
   REQUIRE( rep.af.has_value() );
   CHECK( close( rep.af->adjusted_gap, 0.3375 ) );
}

TEST_CASE( "cutoff gaps clamp to [0, 1]" )
{
   std::vector<IndicatorSpec> specs = { test::cardinal_indicator(
       "income", 100.0, 1.0 ) };
   Dataset data = test::make_dataset( 3, 1, { -50.0, 40.0, 120.0 } );
   ReferenceDistribution ref =
       fit_reference( data, specs, RefMode::in_sample );
   DeprivationProfile prof = build_profile( data, specs, ref, 1.0 );
   std::vector<double> gap = af_gap_per_person( prof, specs );
   CHECK( gap[0] == 1.0 ); // (100 - (-50)) / 100 clamps at 1
   CHECK( close( gap[1], 0.6 ) );
   CHECK( gap[2] == 0.0 );
}

TEST_CASE( "the gap block refuses ordinal or nonpositive-cutoff columns" )
{
   DemoFixture fix;
   DeprivationProfile prof = fix.profile( 0.5 );
   CHECK_THROWS_AS( af_block( prof, fix.specs ), std::runtime_error );

   // Lower-is-better encoding flips the cutoff negative, which the
   // normalized gap cannot absorb.
   std::vector<IndicatorSpec> flipped = { test::cardinal_indicator(
       "pollution", -10.0, 1.0 ) };
   Dataset data = test::make_dataset( 2, 1, { -12.0, -8.0 } );
   ReferenceDistribution ref =
       fit_reference( data, flipped, RefMode::in_sample );
   DeprivationProfile prof2 = build_profile( data, flipped, ref, 1.0 );
   CHECK_THROWS_AS( af_block( prof2, flipped ), std::runtime_error );

   // And compute_measures simply omits the block.
   MeasureReport rep = compute_measures( prof, fix.specs );
   CHECK( !rep.af.has_value() );
}

TEST_CASE( "binary-only populations: the positional index equals H times A" )
{
   std::vector<IndicatorSpec> specs;
   specs.push_back( test::ordinal_indicator( "a", 2, 1.0, 0.5 ) );
   specs.push_back( test::ordinal_indicator( "b", 2, 1.0, 0.5 ) );
   Dataset data = test::make_dataset( 3, 2,
                                      { 0.0, 0.0, //
                                        0.0, 1.0, //
                                        1.0, 1.0 },
                                      { 1.0, 2.5, 0.75 } );
   ReferenceDistribution ref =
       fit_reference( data, specs, RefMode::in_sample );
   DeprivationProfile prof = build_profile( data, specs, ref, 0.5 );
   MeasureReport rep = compute_measures( prof, specs );
   CHECK( std::fabs( rep.adjusted_gap - rep.adjusted_headcount ) <= 1e-12 );
   CHECK( rep.positional_gap == 1.0 );
}

TEST_CASE( "measure report carries the slice bookkeeping" )
{
   DemoFixture fix;
   DeprivationProfile prof = fix.profile( 0.5 );
   MeasureReport rep = compute_measures( prof, fix.specs );
   CHECK( rep.poverty_cutoff == 0.5 );
   CHECK( rep.alpha == 1.0 );
   CHECK( rep.headcount == 0.75 );
   CHECK( close( rep.intensity, 5.0 / 6.0 ) );
   CHECK( close( rep.positional_gap, 14.0 / 15.0 ) );
   CHECK( close( rep.adjusted_headcount, 0.625 ) );
   CHECK( close( rep.adjusted_gap, 7.0 / 12.0 ) );
   CHECK( rep.adjusted_gap_alpha == rep.adjusted_gap );
   CHECK( rep.weighted_total == 4.0 );
   CHECK( rep.weighted_poor == 3.0 );
}

TEST_CASE( "json serialization round-trips every value bit for bit" )
{
   DemoFixture fix;
   DeprivationProfile prof =
       build_profile( fix.data, fix.specs, fix.ref, 0.5 );
   MeasureReport rep = compute_measures( prof, fix.specs, 2.0 );
   nlohmann::json doc = nlohmann::json::parse( measure_report_json( rep ) );

   CHECK( doc["k"].get<double>() == rep.poverty_cutoff );
   CHECK( doc["alpha"].get<double>() == rep.alpha );
   CHECK( doc["headcount"].get<double>() == rep.headcount );
   CHECK( doc["intensity"].get<double>() == rep.intensity );
   CHECK( doc["positional_gap"].get<double>() == rep.positional_gap );
   CHECK( doc["adjusted_headcount"].get<double>() ==
          rep.adjusted_headcount );
   CHECK( doc["adjusted_gap"].get<double>() == rep.adjusted_gap );
   CHECK( doc["adjusted_gap_alpha"].get<double>() ==
          rep.adjusted_gap_alpha );
   CHECK( doc["weighted_total"].get<double>() == rep.weighted_total );
   CHECK( doc["weighted_poor"].get<double>() == rep.weighted_poor );
   // Demo data mixes ordinal indicators, so no cutoff-gap block applies.
   CHECK( !doc.contains( "af_adjusted_gap" ) );
   CHECK( doc["diagnostics"].size() == rep.diagnostics.size() );

   // A cardinal population carries the cutoff-gap block along.
   std::vector<IndicatorSpec> specs = {
      test::cardinal_indicator( "income", 100.0, 1.0 ) };
   Dataset data = test::make_dataset(
       4, 1, { 20.0, 60.0, 90.0, 150.0 } );
   ReferenceDistribution ref =
       fit_reference( data, specs, RefMode::in_sample );
   MeasureReport card = compute_measures(
       build_profile( data, specs, ref, 1.0 ), specs );
   nlohmann::json cdoc =
       nlohmann::json::parse( measure_report_json( card ) );
   REQUIRE( card.af.has_value() );
   CHECK( cdoc["af_gap_avg"].get<double>() == card.af->gap_avg );
   CHECK( cdoc["af_adjusted_headcount"].get<double>() ==
          card.af->adjusted_headcount );
   CHECK( cdoc["af_adjusted_gap"].get<double>() == card.af->adjusted_gap );
}
