#include "ppg/identification.hpp"

#include "ppg/stable_sum.hpp"

#include <cmath>
#include <stdexcept>

namespace ppg
{

namespace
{

[[noreturn]] void
id_fail( const std::string& what )
{
   throw std::runtime_error( "identification: " + what );
}

} // namespace

std::vector<std::uint8_t>
deprivation_matrix( const Dataset& data,
                    const std::vector<IndicatorSpec>& specs )
{
   if( specs.size() != data.cols )
      id_fail( "indicator count does not match dataset columns" );
   std::vector<std::uint8_t> deprived( data.rows * data.cols, 0 );
   for( std::size_t i = 0; i < data.rows; ++i )
      for( std::size_t j = 0; j < data.cols; ++j )
      {
         if( data.is_missing( i, j ) )
            id_fail( "masked cell in row " + std::to_string( i + 1 ) +
                     "; resolve missing data before identification" );
         deprived[i * data.cols + j] =
             data.at( i, j ) < specs[j].cutoff ? 1 : 0;
      }
   return deprived;
}

std::vector<double>
deprivation_score( std::span<const std::uint8_t> deprived, std::size_t rows,
                   std::size_t cols, const std::vector<IndicatorSpec>& specs )
{
   if( specs.size() != cols || deprived.size() != rows * cols )
      id_fail( "deprivation matrix size mismatch" );
   std::vector<double> scores( rows, 0.0 );
   for( std::size_t i = 0; i < rows; ++i )
   {
      // Few indicators, exact weights: plain ordered addition keeps the
      // single-deprivation case c_i == w_j exact, which the union cutoff
      // comparison relies on.
      double c = 0.0;
      for( std::size_t j = 0; j < cols; ++j )
         if( deprived[i * cols + j] )
            c += specs[j].weight;
      scores[i] = c;
   }
   return scores;
}

bool
reaches_cutoff( double score, double poverty_cutoff )
{
   // A person whose weighted deprivation count reaches the cutoff in real
   // arithmetic must stay identified no matter how the weights were
   // accumulated: summing the same weights in a different column order can
   // land one ulp below an exactly representable cutoff (for example a
   // fully deprived row against the intersection cutoff 1).  Scores and
   // cutoffs both live in [0, 1], so a tiny absolute slack is enough and
   // cannot absorb a genuine weight quantum.
   constexpr double kThresholdSlack = 1e-12;
   return score >= poverty_cutoff - kThresholdSlack;
}

std::vector<std::uint8_t>
identify( std::span<const double> scores, double poverty_cutoff )
{
   if( !( poverty_cutoff > 0.0 ) || poverty_cutoff > 1.0 )
      id_fail( "poverty cutoff must lie in (0, 1]" );
   std::vector<std::uint8_t> poor( scores.size(), 0 );
   for( std::size_t i = 0; i < scores.size(); ++i )
      poor[i] = reaches_cutoff( scores[i], poverty_cutoff ) ? 1 : 0;
   return poor;
}

double
union_cutoff( const std::vector<IndicatorSpec>& specs )
{
   if( specs.empty() )
      id_fail( "no indicators" );
   double min = specs.front().weight;
   for( const IndicatorSpec& ind : specs )
      min = std::min( min, ind.weight );
   return min;
}

DeprivationProfile
build_profile( const Dataset& data, const std::vector<IndicatorSpec>& specs,
               const ReferenceDistribution& ref, double poverty_cutoff )
{
   data.validate();
   if( specs.size() != data.cols )
      id_fail( "indicator count does not match dataset columns" );
   if( ref.columns.size() != specs.size() )
      id_fail( "reference covers " + std::to_string( ref.columns.size() ) +
               " indicators, expected " + std::to_string( specs.size() ) );
   for( std::size_t j = 0; j < specs.size(); ++j )
      if( ref.columns[j].name != specs[j].name )
         id_fail( "reference indicator '" + ref.columns[j].name +
                  "' does not match spec indicator '" + specs[j].name + "'" );

   DeprivationProfile prof;
   prof.rows = data.rows;
   prof.cols = data.cols;
   prof.poverty_cutoff = poverty_cutoff;
   prof.values = data.values;
   prof.weight = data.weight;
   prof.group = data.group;
   prof.indicator_weight.reserve( specs.size() );
   for( const IndicatorSpec& ind : specs )
      prof.indicator_weight.push_back( ind.weight );

   prof.deprived = deprivation_matrix( data, specs );
   prof.deprivation_share =
       deprivation_score( prof.deprived, prof.rows, prof.cols, specs );
   prof.poor = identify( prof.deprivation_share, poverty_cutoff );

   prof.depth.assign( prof.rows * prof.cols, 0.0 );
   prof.depth_deprived.assign( prof.rows * prof.cols, 0.0 );
   prof.deprived_censored.assign( prof.rows * prof.cols, 0 );
   prof.depth_censored.assign( prof.rows * prof.cols, 0.0 );
   for( std::size_t i = 0; i < prof.rows; ++i )
      for( std::size_t j = 0; j < prof.cols; ++j )
      {
         std::size_t cell = i * prof.cols + j;
         double s = ref.columns[j].depth_score( data.at( i, j ) );
         prof.depth[cell] = s;
         if( prof.deprived[cell] )
            prof.depth_deprived[cell] = s;
         if( prof.deprived[cell] && prof.poor[i] )
         {
            prof.deprived_censored[cell] = 1;
            prof.depth_censored[cell] = s;
         }
      }

   StableSum w_total;
   StableSum w_poor;
   for( std::size_t i = 0; i < prof.rows; ++i )
   {
      w_total.add( prof.weight[i] );
      if( prof.poor[i] )
         w_poor.add( prof.weight[i] );
   }
   prof.weighted_total = w_total.get();
   prof.weighted_poor = w_poor.get();

   for( const std::string& note : ref.notes )
      prof.diagnostics.push_back( note );

   // With every ordinal cutoff at the top of its scale and a union poverty
   // cutoff, identification no longer separates anyone: anybody below the
   // top of any scale counts as poor, and the index is carried entirely by
   // the depth scores.
   bool all_at_top = !specs.empty();
   for( const IndicatorSpec& ind : specs )
      if( ind.kind != IndicatorKind::ordinal ||
          ind.cutoff != double( ind.categories.size() - 1 ) )
      {
         all_at_top = false;
         break;
      }
   if( all_at_top && poverty_cutoff <= union_cutoff( specs ) )
      prof.diagnostics.push_back(
          "every cutoff sits at the top of its scale under union "
          "identification: no effective deprivation or poverty cutoff is "
          "imposed and the index is driven by depth scores alone" );

   return prof;
}

} // namespace ppg
