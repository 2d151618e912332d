#include "ppg/csv.hpp"

#include <doctest.h>

#include <stdexcept>
#include <string>

using namespace ppg;

namespace
{

std::string
thrown_message( const char* text )
{
   try
   {
      csv::parse( text );
   }
   catch( const std::runtime_error& e )
   {
      return e.what();
   }
   return "";
}

} // namespace

TEST_CASE( "plain table parses into header and rows" )
{
   csv::Table t = csv::parse( "a,b,c\n1,2,3\n4,5,6\n" );
   REQUIRE( t.header.size() == 3 );
   REQUIRE( t.rows.size() == 2 );
   CHECK( t.header[1] == "b" );
   CHECK( t.rows[0][0] == "1" );
   CHECK( t.rows[1][2] == "6" );
}

TEST_CASE( "missing trailing newline still ends the last row" )
{
   csv::Table t = csv::parse( "a,b\n1,2" );
   REQUIRE( t.rows.size() == 1 );
   CHECK( t.rows[0][1] == "2" );
}

TEST_CASE( "quoting covers commas, newlines and doubled quotes" )
{
   csv::Table t = csv::parse(
       "name,note\n\"x,y\",\"line1\nline2\"\nplain,\"she said \"\"hi\"\"\"\n" );
   REQUIRE( t.rows.size() == 2 );
   CHECK( t.rows[0][0] == "x,y" );
   CHECK( t.rows[0][1] == "line1\nline2" );
   CHECK( t.rows[1][1] == "she said \"hi\"" );
}

TEST_CASE( "CRLF line ends and empty fields" )
{
   csv::Table t = csv::parse( "a,b,c\r\n1,,3\r\n" );
   REQUIRE( t.rows.size() == 1 );
   CHECK( t.rows[0][1] == "" );
   CHECK( t.rows[0][2] == "3" );
}

TEST_CASE( "ragged rows are rejected with the offending line number" )
{
   std::string msg = thrown_message( "a,b\n1,2\n3\n" );
   CHECK( msg.find( "line 3" ) != std::string::npos );
   CHECK( msg.find( "expected 2 fields, got 1" ) != std::string::npos );
}

TEST_CASE( "unterminated quote and stray quote are rejected" )
{
   CHECK( thrown_message( "a\n\"open\n" ).find( "unterminated" ) !=
          std::string::npos );
   CHECK( thrown_message( "a\nmid\"dle\n" ).find( "quote" ) !=
          std::string::npos );
   CHECK_THROWS_AS( csv::parse( "" ), std::runtime_error );
}

TEST_CASE( "column lookup by name" )
{
   csv::Table t = csv::parse( "id,weight\n1,2\n" );
   REQUIRE( t.column( "weight" ).has_value() );
   CHECK( *t.column( "weight" ) == 1 );
   CHECK( !t.column( "missing" ).has_value() );
}

TEST_CASE( "escape round-trips every awkward field" )
{
   const std::string fields[] = { "plain", "with,comma", "with\"quote",
                                  "multi\nline", "" };
   std::string text = "v\n";
   for( const std::string& f : fields )
      text += csv::escape( f ) + "\n";
   csv::Table t = csv::parse( text );
   REQUIRE( t.rows.size() == 5 );
   for( std::size_t i = 0; i < 5; ++i )
      CHECK( t.rows[i][0] == fields[i] );
}

TEST_CASE( "read_file reports the path on failure" )
{
   try
   {
      csv::read_file( "/nonexistent/nowhere.csv" );
      CHECK( false );
   }
   catch( const std::runtime_error& e )
   {
      CHECK( std::string( e.what() ).find( "nowhere.csv" ) !=
             std::string::npos );
   }
}
