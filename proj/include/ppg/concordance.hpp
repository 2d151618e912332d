#ifndef PPG_CONCORDANCE_HPP
#define PPG_CONCORDANCE_HPP

#include "ppg/measures.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace ppg
{

/// Weighted Pearson correlation.  Throws when either series has zero
/// weighted variance.
double
weighted_pearson( std::span<const double> x, std::span<const double> y,
                  std::span<const double> w );

/// Weighted fractional ranks in (0, 1): each observation gets the midpoint
/// of its cumulative-weight span, ties sharing the midpoint of their joint
/// span.  Reduces to the usual mid-ranks divided by n for unit weights.
std::vector<double>
weighted_fractional_ranks( std::span<const double> x,
                           std::span<const double> w );

/// Kendall's tau-b with tie correction, unweighted, via an O(n log n)
/// sort-and-count of discordant pairs.  Throws when either series is
/// constant (the tie correction removes all pairs).
double
kendall_tau_b( std::span<const double> x, std::span<const double> y );

/// Rank agreement between the positional depth ordering and the normalized
/// cutoff-gap ordering among the poor.
struct ConcordanceReport
{
   std::vector<std::size_t> poor_rows; // original row indices, ascending
   std::vector<double> depth_score;    // per poor row, positional gap S_i
   std::vector<double> gap_score;      // per poor row, cutoff gap
   std::vector<double> depth_rank;     // weighted fractional rank in [0,1]
   std::vector<double> gap_rank;       // weighted fractional rank in [0,1]
   double pearson = 0.0;               // weighted, on scores
   double spearman = 0.0;              // weighted Pearson on the ranks
   double tau_b = 0.0;                 // unweighted, tie-corrected
   double weighted_poor = 0.0;

   struct Bin
   {
      double lo = 0.0;
      double hi = 0.0;
      double weighted_share = 0.0;
      std::size_t count = 0;
   };
   std::vector<Bin> rank_difference_hist; // depth rank minus gap rank
   double bin_width = 0.0;
   bool se_available = false; // resampling standard errors are not computed
};

/// Compare the per-person positional gap S_i with the per-person normalized
/// cutoff gap among the poor.  Requires an all-cardinal profile (the cutoff
/// gap is undefined for ordinal indicators) and at least two poor rows.
ConcordanceReport
rank_concordance( const DeprivationProfile& prof,
                  const std::vector<IndicatorSpec>& specs,
                  double bin_width = 0.05 );

} // namespace ppg

#endif
