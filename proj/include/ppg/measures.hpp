#ifndef PPG_MEASURES_HPP
#define PPG_MEASURES_HPP

#include "ppg/identification.hpp"

#include <optional>
#include <vector>

namespace ppg
{

/// Classic normalized-gap aggregates, computable only when every indicator
/// is cardinal with a positive encoded cutoff.
struct AfBlock
{
   double gap_avg = 0.0;            // G: average normalized gap among the
                                    //    censored deprived cells
   double adjusted_headcount = 0.0; // M0 = H * A
   double adjusted_gap = 0.0;       // M1 = H * A * G
};

/// One (k, alpha) slice of results.
struct MeasureReport
{
   double poverty_cutoff = 0.0;
   double alpha = 1.0;
   double headcount = 0.0;          // H
   double intensity = 0.0;          // A
   double positional_gap = 0.0;     // S
   double adjusted_headcount = 0.0; // H * A
   double adjusted_gap = 0.0;       // P = H * A * S
   double adjusted_gap_alpha = 0.0; // P_alpha (equals P when alpha is 1)
   double weighted_total = 0.0;
   double weighted_poor = 0.0;
   std::optional<AfBlock> af;
   std::vector<std::string> diagnostics;
};

/// Weighted share of poor rows, H = q / W.
double
headcount( const DeprivationProfile& prof );

/// Per-person censored deprivation share A_i (zero for the non-poor) and the
/// weighted average A over the poor; A is 0 when nobody is poor.
struct IntensityResult
{
   std::vector<double> person; // A_i
   double value = 0.0;         // A
};

IntensityResult
intensity( const DeprivationProfile& prof );

/// Per-person positional gap S_i: the weighted average depth across the
/// person's censored deprivations (zero for rows without any), and the
/// population ratio S of censored depth mass to censored deprivation mass.
struct PositionalGapResult
{
   std::vector<double> person; // S_i
   double value = 0.0;         // S
};

PositionalGapResult
positional_gap( const DeprivationProfile& prof );

/// Per-person degree of poverty P_i = A_i * S_i and the adjusted positional
/// gap index P (the weighted mean of P_i, which factors as H * A * S), plus
/// the alpha-weighted variant that raises each depth score to alpha before
/// aggregation.
struct AdjustedIndexResult
{
   std::vector<double> person; // P_i
   double value = 0.0;         // P
   double value_alpha = 0.0;   // P_alpha
};

AdjustedIndexResult
adjusted_index( const DeprivationProfile& prof, double alpha = 1.0 );

/// Classic cutoff-gap aggregates on the same censored structure.  Throws
/// unless every indicator is cardinal with a positive encoded cutoff.
AfBlock
af_block( const DeprivationProfile& prof,
          const std::vector<IndicatorSpec>& specs );

/// Per-person average normalized cutoff gap across censored deprivations
/// (the AF analogue of S_i), for rank comparisons against depth scores.
std::vector<double>
af_gap_per_person( const DeprivationProfile& prof,
                   const std::vector<IndicatorSpec>& specs );

/// One-stop aggregation of a profile into a report row.  The AF block is
/// included when every indicator is cardinal with positive encoded cutoff.
MeasureReport
compute_measures( const DeprivationProfile& prof,
                  const std::vector<IndicatorSpec>& specs,
                  double alpha = 1.0 );

/// Serialize a report as a single JSON object.  Numbers use shortest
/// round-trip notation, so parsing the text back reproduces every value
/// bit for bit.
std::string
measure_report_json( const MeasureReport& rep );

} // namespace ppg

#endif
