#include "ppg/concordance.hpp"

#include "ppg/stable_sum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ppg
{

namespace
{

[[noreturn]] void
conc_fail( const std::string& what )
{
   throw std::runtime_error( "concordance: " + what );
}

/// Count pairs (i < j) with y[order[i]] > y[order[j]] by merge sort; the
/// number of discordant pairs once `order` sorts the first series.
std::uint64_t
count_inversions( std::vector<double>& y )
{
   std::vector<double> buf( y.size() );
   std::uint64_t inversions = 0;
   for( std::size_t width = 1; width < y.size(); width *= 2 )
   {
      for( std::size_t lo = 0; lo + width < y.size(); lo += 2 * width )
      {
         std::size_t mid = lo + width;
         std::size_t hi = std::min( mid + width, y.size() );
         std::size_t a = lo;
         std::size_t b = mid;
         for( std::size_t out = lo; out < hi; ++out )
         {
            // Take from the right run only on a strict inversion, so equal
            // values never count as discordant.
            if( b < hi && ( a >= mid || y[b] < y[a] ) )
            {
               inversions += mid - a;
               buf[out] = y[b++];
            }
            else
               buf[out] = y[a++];
         }
         std::copy( buf.begin() + lo, buf.begin() + hi, y.begin() + lo );
      }
   }
   return inversions;
}

/// Sum over tie groups of t * (t - 1) / 2 in a sorted series.
std::uint64_t
tie_pairs_sorted( std::span<const double> sorted )
{
   std::uint64_t pairs = 0;
   std::size_t i = 0;
   while( i < sorted.size() )
   {
      std::size_t run = i + 1;
      while( run < sorted.size() && sorted[run] == sorted[i] )
         ++run;
      std::uint64_t t = run - i;
      pairs += t * ( t - 1 ) / 2;
      i = run;
   }
   return pairs;
}

} // namespace

double
weighted_pearson( std::span<const double> x, std::span<const double> y,
                  std::span<const double> w )
{
   if( x.size() != y.size() || x.size() != w.size() )
      conc_fail( "series length mismatch" );
   if( x.size() < 2 )
      conc_fail( "need at least two observations" );

   StableSum w_sum;
   StableSum wx;
   StableSum wy;
   for( std::size_t i = 0; i < x.size(); ++i )
   {
      w_sum.add( w[i] );
      wx.add( w[i] * x[i] );
      wy.add( w[i] * y[i] );
   }
   double total = w_sum.get();
   double mean_x = wx.get() / total;
   double mean_y = wy.get() / total;

   StableSum sxx;
   StableSum syy;
   StableSum sxy;
   for( std::size_t i = 0; i < x.size(); ++i )
   {
      double dx = x[i] - mean_x;
      double dy = y[i] - mean_y;
      sxx.add( w[i] * dx * dx );
      syy.add( w[i] * dy * dy );
      sxy.add( w[i] * dx * dy );
   }
   double var_x = sxx.get();
   double var_y = syy.get();
   if( !( var_x > 0.0 ) || !( var_y > 0.0 ) )
      conc_fail( "zero variance; correlation is undefined" );
   // Evaluate r = cov / sqrt(var_x * var_y) as sign(cov) * sqrt((cov/var_x) *
   // (cov/var_y)).  When the two series are identical up to the last bit the
   // three accumulators coincide, both ratios are exactly one, and the result
   // is exactly +/-1 instead of drifting an ulp through sqrt of a rounded
   // product.
   double cov = sxy.get();
   double ratio = ( cov / var_x ) * ( cov / var_y );
   double r = std::copysign( std::sqrt( std::max( ratio, 0.0 ) ), cov );
   return std::clamp( r, -1.0, 1.0 );
}

std::vector<double>
weighted_fractional_ranks( std::span<const double> x,
                           std::span<const double> w )
{
   if( x.size() != w.size() )
      conc_fail( "series length mismatch" );
   std::vector<std::size_t> order( x.size() );
   std::iota( order.begin(), order.end(), 0 );
   std::stable_sort( order.begin(), order.end(),
                     [&]( std::size_t a, std::size_t b )
                     { return x[a] < x[b]; } );

   StableSum w_sum;
   for( double wi : w )
      w_sum.add( wi );
   double total = w_sum.get();

   std::vector<double> rank( x.size(), 0.0 );
   StableSum below;
   std::size_t i = 0;
   while( i < order.size() )
   {
      // One tie group at a time: every member gets the midpoint of the
      // group's cumulative-weight span.
      std::size_t run = i;
      StableSum group;
      while( run < order.size() && x[order[run]] == x[order[i]] )
         group.add( w[order[run++]] );
      double mid = ( below.get() + group.get() / 2.0 ) / total;
      for( std::size_t at = i; at < run; ++at )
         rank[order[at]] = mid;
      below.add( group.get() );
      i = run;
   }
   return rank;
}

double
kendall_tau_b( std::span<const double> x, std::span<const double> y )
{
   if( x.size() != y.size() )
      conc_fail( "series length mismatch" );
   const std::size_t n = x.size();
   if( n < 2 )
      conc_fail( "need at least two observations" );

   // Sort by x, breaking ties by y; discordant pairs are then strict
   // y-inversions, and joint ties fall out of both tie counts.
   std::vector<std::size_t> order( n );
   std::iota( order.begin(), order.end(), 0 );
   std::sort( order.begin(), order.end(),
              [&]( std::size_t a, std::size_t b )
              {
                 if( x[a] != x[b] )
                    return x[a] < x[b];
                 return y[a] < y[b];
              } );

   std::uint64_t pairs_total = std::uint64_t( n ) * ( n - 1 ) / 2;
   std::uint64_t ties_x = 0;
   std::uint64_t ties_xy = 0;
   std::size_t i = 0;
   while( i < n )
   {
      std::size_t run = i;
      while( run < n && x[order[run]] == x[order[i]] )
         ++run;
      std::uint64_t t = run - i;
      ties_x += t * ( t - 1 ) / 2;
      std::size_t at = i;
      while( at < run )
      {
         std::size_t sub = at;
         while( sub < run && y[order[sub]] == y[order[at]] )
            ++sub;
         std::uint64_t u = sub - at;
         ties_xy += u * ( u - 1 ) / 2;
         at = sub;
      }
      i = run;
   }

   std::vector<double> y_by_x( n );
   for( std::size_t at = 0; at < n; ++at )
      y_by_x[at] = y[order[at]];
   std::uint64_t discordant = count_inversions( y_by_x );

   std::vector<double> y_sorted( y.begin(), y.end() );
   std::sort( y_sorted.begin(), y_sorted.end() );
   std::uint64_t ties_y = tie_pairs_sorted( y_sorted );

   double den_x = double( pairs_total - ties_x );
   double den_y = double( pairs_total - ties_y );
   if( !( den_x > 0.0 ) || !( den_y > 0.0 ) )
      conc_fail( "constant series; tau-b is undefined" );

   // concordant - discordant = usable pairs - 2 * discordant, where joint
   // ties re-enter because they were subtracted with both tie terms.
   double num = double( pairs_total ) - double( ties_x ) - double( ties_y ) +
                double( ties_xy ) - 2.0 * double( discordant );
   return num / std::sqrt( den_x * den_y );
}

ConcordanceReport
rank_concordance( const DeprivationProfile& prof,
                  const std::vector<IndicatorSpec>& specs, double bin_width )
{
   if( !( bin_width > 0.0 ) || bin_width > 2.0 )
      conc_fail( "bin width must lie in (0, 2]" );
   for( const IndicatorSpec& ind : specs )
      if( ind.kind != IndicatorKind::cardinal )
         conc_fail( "rank comparison needs cardinal indicators; indicator '" +
                    ind.name + "' is ordinal" );

   ConcordanceReport report;
   report.bin_width = bin_width;

   std::vector<double> depth_all = positional_gap( prof ).person;
   std::vector<double> gap_all = af_gap_per_person( prof, specs );
   std::vector<double> weights;
   std::vector<double> depth;
   std::vector<double> gap;
   StableSum w_poor;
   for( std::size_t i = 0; i < prof.rows; ++i )
   {
      if( !prof.is_poor( i ) )
         continue;
      report.poor_rows.push_back( i );
      depth.push_back( depth_all[i] );
      gap.push_back( gap_all[i] );
      weights.push_back( prof.weight[i] );
      w_poor.add( prof.weight[i] );
   }
   if( report.poor_rows.size() < 2 )
      conc_fail( "need at least two poor rows to compare rankings" );
   report.weighted_poor = w_poor.get();
   report.depth_score = depth;
   report.gap_score = gap;

   report.pearson = weighted_pearson( depth, gap, weights );
   report.depth_rank = weighted_fractional_ranks( depth, weights );
   report.gap_rank = weighted_fractional_ranks( gap, weights );
   report.spearman = weighted_pearson( report.depth_rank, report.gap_rank,
                                       weights );
   report.tau_b = kendall_tau_b( depth, gap );

   // Histogram of rank differences on [-1, 1].
   std::size_t n_bins = std::size_t( std::ceil( 2.0 / bin_width - 1e-9 ) );
   report.rank_difference_hist.assign( n_bins, {} );
   for( std::size_t b = 0; b < n_bins; ++b )
   {
      report.rank_difference_hist[b].lo = -1.0 + double( b ) * bin_width;
      report.rank_difference_hist[b].hi =
          b + 1 == n_bins ? 1.0 : -1.0 + double( b + 1 ) * bin_width;
   }
   std::vector<StableSum> bin_mass( n_bins );
   for( std::size_t i = 0; i < report.depth_rank.size(); ++i )
   {
      double diff = report.depth_rank[i] - report.gap_rank[i];
      auto b = std::size_t(
          std::max( 0.0, std::floor( ( diff + 1.0 ) / bin_width ) ) );
      if( b >= n_bins )
         b = n_bins - 1;
      report.rank_difference_hist[b].count += 1;
      bin_mass[b].add( weights[i] );
   }
   for( std::size_t b = 0; b < n_bins; ++b )
      report.rank_difference_hist[b].weighted_share =
          bin_mass[b].get() / report.weighted_poor;
   return report;
}

} // namespace ppg
