#include "ppg/measures.hpp"

#include "ppg/stable_sum.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace ppg
{

namespace
{

[[noreturn]] void
measure_fail( const std::string& what )
{
   throw std::runtime_error( "measures: " + what );
}

/// Normalized cutoff gap (z - x) / z, clamped to [0, 1] so negative
/// achievements cannot push a single gap above 1.
double
normalized_gap( double value, double cutoff )
{
   double gap = ( cutoff - value ) / cutoff;
   return std::min( 1.0, std::max( 0.0, gap ) );
}

} // namespace

double
headcount( const DeprivationProfile& prof )
{
   return prof.weighted_poor / prof.weighted_total;
}

IntensityResult
intensity( const DeprivationProfile& prof )
{
   IntensityResult res;
   res.person.assign( prof.rows, 0.0 );
   StableSum weighted;
   for( std::size_t i = 0; i < prof.rows; ++i )
   {
      if( !prof.is_poor( i ) )
         continue;
      // A_i is the deprivation share itself once censored: the poor keep
      // their score, everyone else drops to zero.
      res.person[i] = prof.deprivation_share[i];
      weighted.add( prof.weight[i] * res.person[i] );
   }
   res.value = prof.weighted_poor > 0.0 ? weighted.get() / prof.weighted_poor
                                        : 0.0;
   return res;
}

PositionalGapResult
positional_gap( const DeprivationProfile& prof )
{
   PositionalGapResult res;
   res.person.assign( prof.rows, 0.0 );
   StableSum depth_mass;  // sum_i w_i sum_j w_j poor*deprived*s
   StableSum status_mass; // sum_i w_i sum_j w_j poor*deprived
   for( std::size_t i = 0; i < prof.rows; ++i )
   {
      double num = 0.0;
      double den = 0.0;
      for( std::size_t j = 0; j < prof.cols; ++j )
      {
         std::size_t cell = i * prof.cols + j;
         if( !prof.deprived_censored[cell] )
            continue;
         num += prof.indicator_weight[j] * prof.depth_censored[cell];
         den += prof.indicator_weight[j];
      }
      res.person[i] = den > 0.0 ? num / den : 0.0;
      depth_mass.add( prof.weight[i] * num );
      status_mass.add( prof.weight[i] * den );
   }
   double den = status_mass.get();
   res.value = den > 0.0 ? depth_mass.get() / den : 0.0;
   return res;
}

AdjustedIndexResult
adjusted_index( const DeprivationProfile& prof, double alpha )
{
   if( !( alpha > 0.0 ) || !std::isfinite( alpha ) )
      measure_fail( "alpha must be a positive finite number" );
   AdjustedIndexResult res;
   res.person.assign( prof.rows, 0.0 );
   StableSum total;
   StableSum total_alpha;
   for( std::size_t i = 0; i < prof.rows; ++i )
   {
      double degree = 0.0;
      double degree_alpha = 0.0;
      for( std::size_t j = 0; j < prof.cols; ++j )
      {
         std::size_t cell = i * prof.cols + j;
         if( !prof.deprived_censored[cell] )
            continue;
         double s = prof.depth_censored[cell];
         degree += prof.indicator_weight[j] * s;
         degree_alpha += prof.indicator_weight[j] *
                         ( alpha == 1.0 ? s : std::pow( s, alpha ) );
      }
      res.person[i] = degree;
      total.add( prof.weight[i] * degree );
      total_alpha.add( prof.weight[i] * degree_alpha );
   }
   res.value = total.get() / prof.weighted_total;
   res.value_alpha = alpha == 1.0 ? res.value
                                  : total_alpha.get() / prof.weighted_total;
   return res;
}

AfBlock
af_block( const DeprivationProfile& prof,
          const std::vector<IndicatorSpec>& specs )
{
   if( specs.size() != prof.cols )
      measure_fail( "indicator count does not match profile columns" );
   for( const IndicatorSpec& ind : specs )
   {
      if( ind.kind != IndicatorKind::cardinal )
         measure_fail( "cutoff gaps need cardinal indicators; indicator '" +
                       ind.name + "' is ordinal" );
      if( !( ind.cutoff > 0.0 ) )
         measure_fail( "cutoff gaps need a positive encoded cutoff; "
                       "indicator '" +
                       ind.name + "' has cutoff " +
                       std::to_string( ind.cutoff ) );
   }

   StableSum gap_mass;
   StableSum status_mass;
   for( std::size_t i = 0; i < prof.rows; ++i )
      for( std::size_t j = 0; j < prof.cols; ++j )
      {
         std::size_t cell = i * prof.cols + j;
         if( !prof.deprived_censored[cell] )
            continue;
         double gap = normalized_gap( prof.values[cell], specs[j].cutoff );
         gap_mass.add( prof.weight[i] * prof.indicator_weight[j] * gap );
         status_mass.add( prof.weight[i] * prof.indicator_weight[j] );
      }

   AfBlock block;
   double den = status_mass.get();
   block.gap_avg = den > 0.0 ? gap_mass.get() / den : 0.0;
   double h = headcount( prof );
   double a = intensity( prof ).value;
   block.adjusted_headcount = h * a;
   block.adjusted_gap = h * a * block.gap_avg;
   return block;
}

std::vector<double>
af_gap_per_person( const DeprivationProfile& prof,
                   const std::vector<IndicatorSpec>& specs )
{
   if( specs.size() != prof.cols )
      measure_fail( "indicator count does not match profile columns" );
   std::vector<double> person( prof.rows, 0.0 );
   for( std::size_t i = 0; i < prof.rows; ++i )
   {
      double num = 0.0;
      double den = 0.0;
      for( std::size_t j = 0; j < prof.cols; ++j )
      {
         std::size_t cell = i * prof.cols + j;
         if( !prof.deprived_censored[cell] )
            continue;
         num += prof.indicator_weight[j] *
                normalized_gap( prof.values[cell], specs[j].cutoff );
         den += prof.indicator_weight[j];
      }
      person[i] = den > 0.0 ? num / den : 0.0;
   }
   return person;
}

MeasureReport
compute_measures( const DeprivationProfile& prof,
                  const std::vector<IndicatorSpec>& specs, double alpha )
{
   MeasureReport report;
   report.poverty_cutoff = prof.poverty_cutoff;
   report.alpha = alpha;
   report.weighted_total = prof.weighted_total;
   report.weighted_poor = prof.weighted_poor;
   report.headcount = headcount( prof );
   report.intensity = intensity( prof ).value;
   report.positional_gap = positional_gap( prof ).value;
   report.adjusted_headcount = report.headcount * report.intensity;

   AdjustedIndexResult adjusted = adjusted_index( prof, alpha );
   report.adjusted_gap = adjusted.value;
   report.adjusted_gap_alpha = adjusted.value_alpha;

   report.diagnostics = prof.diagnostics;
   if( prof.weighted_poor <= 0.0 )
      report.diagnostics.push_back(
          "nobody is poor at this cutoff; intensity and gap averages are 0 "
          "by convention" );

   bool af_applicable = true;
   for( const IndicatorSpec& ind : specs )
      if( ind.kind != IndicatorKind::cardinal || !( ind.cutoff > 0.0 ) )
      {
         af_applicable = false;
         break;
      }
   if( af_applicable )
      report.af = af_block( prof, specs );
   return report;
}

std::string
measure_report_json( const MeasureReport& rep )
{
   nlohmann::json doc;
   doc["k"] = rep.poverty_cutoff;
   doc["alpha"] = rep.alpha;
   doc["headcount"] = rep.headcount;
   doc["intensity"] = rep.intensity;
   doc["positional_gap"] = rep.positional_gap;
   doc["adjusted_headcount"] = rep.adjusted_headcount;
   doc["adjusted_gap"] = rep.adjusted_gap;
   doc["adjusted_gap_alpha"] = rep.adjusted_gap_alpha;
   doc["weighted_total"] = rep.weighted_total;
   doc["weighted_poor"] = rep.weighted_poor;
   if( rep.af )
   {
      doc["af_gap_avg"] = rep.af->gap_avg;
      doc["af_adjusted_headcount"] = rep.af->adjusted_headcount;
      doc["af_adjusted_gap"] = rep.af->adjusted_gap;
   }
   doc["diagnostics"] = rep.diagnostics;
   return doc.dump( 2 ) + "\n";
}

} // namespace ppg
