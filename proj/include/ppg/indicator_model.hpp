#ifndef PPG_INDICATOR_MODEL_HPP
#define PPG_INDICATOR_MODEL_HPP

#include "ppg/csv.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace ppg
{

enum class IndicatorKind
{
   ordinal,
   cardinal
};

enum class Direction
{
   higher_is_better,
   lower_is_better
};

enum class MissingPolicy
{
   error,
   drop_row,
   most_deprived
};

/// One achievement level of an ordinal indicator.  The encoded code of the
/// level is its position in IndicatorSpec::categories; several raw labels may
/// collapse onto one level.
struct Category
{
   std::vector<std::string> labels;
};

/// Declarative description of a single indicator column.
///
/// Values are always handled on an encoded scale where larger means better
/// off: ordinal categories are listed worst first, and cardinal columns with
/// lower-is-better direction are negated on load (with the cutoff negated to
/// match, so `value < cutoff` means deprived everywhere downstream).
struct IndicatorSpec
{
   std::string name;
   std::string source_column;
   IndicatorKind kind = IndicatorKind::ordinal;
   std::vector<Category> categories; // ordinal only, worst first
   Direction direction = Direction::higher_is_better; // cardinal only
   double cutoff = 0.0; // encoded scale
   double weight = 0.0; // normalized to sum 1 across indicators

   bool
   is_binary() const
   {
      return kind == IndicatorKind::ordinal && categories.size() == 2;
   }
};

/// The full parsed indicator-specification document.
struct ParsedSpec
{
   std::vector<IndicatorSpec> indicators;
   std::string survey_weight_column; // empty: unit weights
   std::string subgroup_column;      // empty: no subgroups
   MissingPolicy missing_policy = MissingPolicy::error;
   std::vector<std::string> warnings;
};

/// Parse the JSON indicator-specification document.  Validates structure,
/// uniqueness of names and labels, cutoff ranges and weight positivity;
/// weight normalization is left to normalize_weights.  Throws
/// std::runtime_error naming the offending indicator.
ParsedSpec
parse_spec( const std::string& text );

ParsedSpec
parse_spec_file( const std::string& path );

/// Rescale indicator weights to sum to 1.  Idempotent up to floating-point
/// rounding; exposed separately so tests can feed hand-built specs.
void
normalize_weights( std::vector<IndicatorSpec>& indicators );

/// Encoded survey microdata: an n-by-d achievement matrix on the encoded
/// scale, per-row survey weights, and optional subgroup labels.
struct Dataset
{
   std::size_t rows = 0;
   std::size_t cols = 0;
   std::vector<double> values;         // rows x cols, row-major
   std::vector<std::uint8_t> missing;  // rows x cols, 1 = masked cell
   std::vector<double> weight;         // per row, > 0
   std::vector<std::string> group;     // per row, empty vector = no subgroups
   std::vector<std::string> notes;     // encoding diagnostics (dropped rows..)

   double&
   at( std::size_t i, std::size_t j )
   {
      return values[i * cols + j];
   }

   double
   at( std::size_t i, std::size_t j ) const
   {
      return values[i * cols + j];
   }

   bool
   is_missing( std::size_t i, std::size_t j ) const
   {
      return missing[i * cols + j] != 0;
   }

   bool
   has_groups() const
   {
      return !group.empty();
   }

   bool
   has_missing() const
   {
      for( std::uint8_t m : missing )
         if( m )
            return true;
      return false;
   }

   /// Total survey weight, accumulated in row order.
   double
   total_weight() const;

   /// Copy of the selected rows, in the given order.
   Dataset
   subset( const std::vector<std::size_t>& row_ids ) const;

   /// Check structural invariants (sizes, finite positive weights); throws
   /// std::runtime_error on violation.
   void
   validate() const;
};

/// Encode a raw CSV table against a parsed specification: map ordinal labels
/// to codes, parse cardinal cells (negating lower-is-better columns), apply
/// the missing-data policy, and read survey weights and subgroup labels.
/// Throws std::runtime_error naming the row and column on bad cells.
Dataset
encode_dataset( const csv::Table& table, const ParsedSpec& spec );

/// Concatenate datasets with identical column counts; subgroup labels are
/// kept only when every part has them.
Dataset
concatenate( const std::vector<Dataset>& parts );

} // namespace ppg

#endif
