#ifndef PPG_STABLE_SUM_HPP
#define PPG_STABLE_SUM_HPP

#include <cstddef>
#include <span>

namespace ppg
{

/// Compensated (Neumaier) accumulator.
///
/// Ratios of weighted sums are compared at tolerances down to 1e-12 all over
/// this codebase, so plain left-to-right addition is not good enough once
/// survey weights span a few orders of magnitude.  The accumulator keeps a
/// running correction term that captures the low-order bits lost by each
/// addition and folds them back in at the end.
class StableSum
{
 public:
   StableSum() = default;

   explicit StableSum( double init ) : sum( init ) {}

   void
   add( double value )
   {
      double t = sum + value;
      if( ( sum >= value ) == ( sum >= -value ) )
         correction += ( sum - t ) + value;
      else
         correction += ( value - t ) + sum;
      sum = t;
   }

   double
   get() const
   {
      return sum + correction;
   }

 private:
   double sum = 0.0;
   double correction = 0.0;
};

/// Compensated sum of a contiguous range, in range order.
inline double
stable_sum( std::span<const double> values )
{
   StableSum s;
   for( double v : values )
      s.add( v );
   return s.get();
}

} // namespace ppg

#endif
