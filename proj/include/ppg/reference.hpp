#ifndef PPG_REFERENCE_HPP
#define PPG_REFERENCE_HPP

#include "ppg/indicator_model.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ppg
{

enum class RefMode
{
   anchored,  // frozen distribution fitted on baseline data
   in_sample, // fitted on the data being scored
   pooled     // fitted on several datasets combined
};

enum class PoolingRule
{
   concatenate, // pool observations with their survey weights as-is
   equal_weight // rescale each dataset to total weight 1 before pooling
};

std::string
to_string( RefMode mode );

RefMode
ref_mode_from_string( std::string_view name );

/// Weighted empirical distribution of one indicator column: the ascending
/// distinct values seen in the reference data and the cumulative weight
/// share at each of them.
struct IndicatorCdf
{
   std::string name;
   std::vector<double> support;   // ascending distinct encoded values
   std::vector<double> cum_share; // nondecreasing, last entry exactly 1
   double min_value = 0.0;        // support.front()
   double denom = 0.0;            // share of mass strictly above the minimum

   bool
   degenerate() const
   {
      return !( denom > 0.0 );
   }

   /// Right-continuous weighted CDF; 0 below the support minimum.
   double
   cdf( double x ) const;

   /// Positional depth score: the share of mass strictly above x among the
   /// mass strictly above the minimum, clamped to [0, 1].  Values below the
   /// support score 1, values at or above the maximum score 0.  When the
   /// whole reference sits on a single point the score degenerates to the
   /// at-or-below-minimum indicator.
   double
   depth_score( double x ) const;
};

/// A fitted reference distribution: one CDF per indicator plus provenance.
struct ReferenceDistribution
{
   RefMode mode = RefMode::in_sample;
   std::vector<IndicatorCdf> columns;
   std::string fingerprint; // content fingerprint of the fitted data
   std::string fitted_at;   // ISO-8601 UTC; honors SOURCE_DATE_EPOCH
   std::vector<std::string> notes;

   const IndicatorCdf&
   column( std::size_t j ) const
   {
      return columns.at( j );
   }

   const IndicatorCdf*
   find( std::string_view name ) const;
};

/// FNV-1a content fingerprint of a dataset (values, weights, labels), as a
/// fixed-width hex string.  Used for provenance of fitted references.
std::string
dataset_fingerprint( const Dataset& data );

/// Fit one CDF per indicator.  Masked cells are skipped, so each column has
/// its own weight denominator; a column with no observed values is an error,
/// and a column whose whole mass sits on a single value is noted as
/// degenerate.
ReferenceDistribution
fit_reference( const Dataset& data, const std::vector<IndicatorSpec>& specs,
               RefMode mode );

/// Fit on several datasets combined.  `concatenate` pools observations with
/// their survey weights unchanged, so bigger samples dominate;
/// `equal_weight` first rescales every dataset to total weight 1 so each
/// contributes equally regardless of size.
ReferenceDistribution
fit_reference_pooled( const std::vector<Dataset>& parts,
                      const std::vector<IndicatorSpec>& specs,
                      PoolingRule rule = PoolingRule::concatenate );

double
cdf_value( const ReferenceDistribution& ref, std::size_t j, double x );

double
positional_depth_score( const ReferenceDistribution& ref, std::size_t j,
                        double x );

/// Serialize to the versioned JSON reference document.  Doubles are written
/// with 17 significant digits so a save/load round trip reproduces every
/// evaluation bit for bit.
std::string
save_reference( const ReferenceDistribution& ref );

void
save_reference_file( const ReferenceDistribution& ref,
                     const std::string& path );

/// Parse and re-validate a reference document; refuses malformed input
/// (unknown format or version, unsorted support, shares outside [0, 1],
/// inconsistent minimum or denominator).
ReferenceDistribution
load_reference( const std::string& text );

ReferenceDistribution
load_reference_file( const std::string& path );

} // namespace ppg

#endif
