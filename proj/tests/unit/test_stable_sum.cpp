#include "ppg/stable_sum.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using ppg::StableSum;
using ppg::stable_sum;

TEST_CASE( "compensated sum survives catastrophic cancellation" )
{
   // Plain left-to-right addition loses the 1.0 entirely: 1e16 + 1.0
   // rounds back to 1e16, so the naive result is 0.
   StableSum s;
   s.add( 1e16 );
   s.add( 1.0 );
   s.add( -1e16 );
   CHECK( s.get() == 1.0 );

   double naive = 1e16;
   naive += 1.0;
   naive += -1e16;
   CHECK( naive == 0.0 );
}

TEST_CASE( "compensated sum handles the reversed magnitude order" )
{
   // Neumaier's variant (unlike plain Kahan) also recovers the low-order
   // bits when the incoming term is the large one.
   StableSum s;
   s.add( 1.0 );
   s.add( 1e100 );
   s.add( 1.0 );
   s.add( -1e100 );
   CHECK( s.get() == 2.0 );
}

TEST_CASE( "range sum matches long double accumulation on mixed magnitudes" )
{
   std::mt19937_64 gen( 91 );
   std::uniform_real_distribution<double> mant( -1.0, 1.0 );
   std::uniform_int_distribution<int> expo( -12, 12 );
   std::vector<double> values;
   values.reserve( 1000 );
   for( int i = 0; i < 1000; ++i )
      values.push_back( std::ldexp( mant( gen ), expo( gen ) * 4 ) );

   long double exact = 0.0L;
   for( double v : values )
      exact += static_cast<long double>( v );

   double got = stable_sum( values );
   long double scale = 0.0L;
   for( double v : values )
      scale += std::fabs( static_cast<long double>( v ) );
   CHECK( std::fabs( static_cast<long double>( got ) - exact ) <=
          1e-15L * scale );
}

TEST_CASE( "empty and seeded accumulators" )
{
   CHECK( StableSum().get() == 0.0 );
   CHECK( stable_sum( std::vector<double>{} ) == 0.0 );

   StableSum seeded( 2.5 );
   seeded.add( 0.5 );
   CHECK( seeded.get() == 3.0 );
}

TEST_CASE( "sum of many equal unit weights is the exact count" )
{
   // fit_column and the measure denominators rely on unit weights summing
   // to the exact row count.
   StableSum s;
   for( int i = 0; i < 100000; ++i )
      s.add( 1.0 );
   CHECK( s.get() == 100000.0 );
}
