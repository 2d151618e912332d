#include "ppg/identification.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <stdexcept>
#include <vector>

using namespace ppg;

namespace
{

DeprivationProfile
demo_profile( double k )
{
   Dataset data = test::demo_dataset();
   std::vector<IndicatorSpec> specs = test::demo_specs();
   ReferenceDistribution ref =
       fit_reference( data, specs, RefMode::in_sample );
   return build_profile( data, specs, ref, k );
}

} // namespace

TEST_CASE( "deprivation statuses and weighted scores" )
{
   Dataset data = test::demo_dataset();
   std::vector<IndicatorSpec> specs = test::demo_specs();

   std::vector<std::uint8_t> dep = deprivation_matrix( data, specs );
   CHECK( dep == std::vector<std::uint8_t>{ 1, 1, 1, 1, 0, 1, 0, 0 } );

   std::vector<double> score = deprivation_score( dep, 4, 2, specs );
   CHECK( score[0] == 1.0 );
   CHECK( score[1] == 1.0 );
   CHECK( score[2] == 0.5 );
   CHECK( score[3] == 0.0 );

   // Strictly below the cutoff counts; sitting exactly on it does not.
   CHECK( !( data.at( 2, 0 ) < specs[0].cutoff ) );
}

TEST_CASE( "poverty identification across cutoffs" )
{
   std::vector<double> score = { 1.0, 1.0, 0.5, 0.0 };
   CHECK( identify( score, 0.5 ) ==
          std::vector<std::uint8_t>{ 1, 1, 1, 0 } );
   CHECK( identify( score, 0.75 ) ==
          std::vector<std::uint8_t>{ 1, 1, 0, 0 } );
   CHECK( identify( score, 1.0 ) ==
          std::vector<std::uint8_t>{ 1, 1, 0, 0 } );

   CHECK_THROWS_AS( identify( score, 0.0 ), std::runtime_error );
   CHECK_THROWS_AS( identify( score, 1.5 ), std::runtime_error );
   CHECK_THROWS_AS( identify( score, -0.1 ), std::runtime_error );
}

TEST_CASE( "union and intersection cutoffs" )
{
   std::vector<IndicatorSpec> specs;
   specs.push_back( test::ordinal_indicator( "a", 2, 1.0, 0.2 ) );
   specs.push_back( test::ordinal_indicator( "b", 2, 1.0, 0.8 ) );
   CHECK( union_cutoff( specs ) == 0.2 );
   CHECK( union_cutoff( test::demo_specs() ) == 0.5 );
   CHECK( intersection_cutoff() == 1.0 );
}

TEST_CASE( "profile assembles statuses, depths and censored variants" )
{
   DeprivationProfile prof = demo_profile( 0.5 );
   REQUIRE( prof.rows == 4 );
   REQUIRE( prof.cols == 2 );
   CHECK( prof.poverty_cutoff == 0.5 );

   CHECK( prof.poor == std::vector<std::uint8_t>{ 1, 1, 1, 0 } );
   CHECK( prof.weighted_total == 4.0 );
   CHECK( prof.weighted_poor == 3.0 );
   CHECK( prof.is_poor( 0 ) );
   CHECK( !prof.is_poor( 3 ) );
   CHECK( prof.is_deprived( 2, 1 ) );
   CHECK( !prof.is_deprived( 2, 0 ) );

   // Housing depths walk down the CDF; water depths are the binary pattern.
   CHECK( prof.depth[0 * 2 + 0] == 1.0 );
   CHECK( prof.depth[1 * 2 + 0] ==
          doctest::Approx( 2.0 / 3.0 ).epsilon( 1e-15 ) );
   CHECK( prof.depth[2 * 2 + 0] ==
          doctest::Approx( 1.0 / 3.0 ).epsilon( 1e-15 ) );
   CHECK( prof.depth[3 * 2 + 0] == 0.0 );
   CHECK( prof.depth[0 * 2 + 1] == 1.0 );
   CHECK( prof.depth[3 * 2 + 1] == 0.0 );

   // Censoring keeps the poor rows' deprived cells only.  Row 2 is poor but
   // not deprived in housing, row 3 is not poor at all.
   CHECK( prof.deprived_censored ==
          std::vector<std::uint8_t>{ 1, 1, 1, 1, 0, 1, 0, 0 } );
   CHECK( prof.depth_censored[2 * 2 + 0] == 0.0 );
   CHECK( prof.depth_censored[2 * 2 + 1] == 1.0 );
   CHECK( prof.depth_censored[3 * 2 + 1] == 0.0 );

   // depth_deprived keeps all deprived cells regardless of poverty status.
   CHECK( prof.depth_deprived[2 * 2 + 1] == 1.0 );
}

TEST_CASE( "censoring tightens as the cutoff rises" )
{
   DeprivationProfile prof = demo_profile( 1.0 );
   CHECK( prof.poor == std::vector<std::uint8_t>{ 1, 1, 0, 0 } );
   CHECK( prof.weighted_poor == 2.0 );
   // Row 2 falls out of the poor set, so its censored entries vanish while
   // the raw deprivation stays.
   CHECK( prof.deprived_censored[2 * 2 + 1] == 0 );
   CHECK( prof.deprived[2 * 2 + 1] == 1 );
   CHECK( prof.depth_censored[2 * 2 + 1] == 0.0 );
}

TEST_CASE( "profile validation errors" )
{
   Dataset data = test::demo_dataset();
   std::vector<IndicatorSpec> specs = test::demo_specs();
   ReferenceDistribution ref =
       fit_reference( data, specs, RefMode::in_sample );

   // Masked cells are not scoreable.
   Dataset masked = test::demo_dataset();
   masked.missing[0] = 1;
   CHECK_THROWS_AS( build_profile( masked, specs, ref, 0.5 ),
                    std::runtime_error );
   CHECK_THROWS_AS( deprivation_matrix( masked, specs ),
                    std::runtime_error );

   // The reference must cover every indicator by name.
   std::vector<IndicatorSpec> renamed = specs;
   renamed[1].name = "electricity";
   CHECK_THROWS_AS( build_profile( data, renamed, ref, 0.5 ),
                    std::runtime_error );

   // The poverty cutoff must be a share in (0, 1].
   CHECK_THROWS_AS( build_profile( data, specs, ref, 0.0 ),
                    std::runtime_error );
   CHECK_THROWS_AS( build_profile( data, specs, ref, 1.01 ),
                    std::runtime_error );
}

TEST_CASE( "anchored profiles score against the frozen distribution" )
{
   std::vector<IndicatorSpec> specs = { test::ordinal_indicator(
       "v", 8, 4.0, 1.0 ) };
   Dataset baseline =
       test::make_dataset( 4, 1, { 0.0, 1.0, 2.0, 3.0 } );
   ReferenceDistribution anchor =
       fit_reference( baseline, specs, RefMode::anchored );

   Dataset follow_up = test::make_dataset( 2, 1, { 1.0, 3.0 } );
   DeprivationProfile prof = build_profile( follow_up, specs, anchor, 1.0 );
   // Depths come from the baseline CDF, not from the two scored rows.
   CHECK( prof.depth[0] == doctest::Approx( 2.0 / 3.0 ).epsilon( 1e-15 ) );
   CHECK( prof.depth[1] == 0.0 );
}
