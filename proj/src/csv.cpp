#include "ppg/csv.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ppg::csv
{

namespace
{

[[noreturn]] void
fail( std::size_t line, const std::string& what )
{
   throw std::runtime_error( "csv: line " + std::to_string( line ) + ": " +
                             what );
}

} // namespace

Table
parse( std::string_view text )
{
   Table table;
   std::vector<std::string> row;
   std::string field;
   bool quoted = false;
   bool row_started = false;
   std::size_t line = 1;

   auto end_field = [&]() {
      row.push_back( std::move( field ) );
      field.clear();
   };
   auto end_row = [&]( std::size_t at_line ) {
      end_field();
      if( table.header.empty() )
         table.header = std::move( row );
      else if( row.size() != table.header.size() )
         fail( at_line, "expected " + std::to_string( table.header.size() ) +
                            " fields, got " + std::to_string( row.size() ) );
      else
         table.rows.push_back( std::move( row ) );
      row.clear();
      row_started = false;
   };

   for( std::size_t pos = 0; pos < text.size(); ++pos )
   {
      char c = text[pos];
      if( quoted )
      {
         if( c == '"' )
         {
            if( pos + 1 < text.size() && text[pos + 1] == '"' )
            {
               field += '"';
               ++pos;
            }
            else
               quoted = false;
         }
         else
         {
            if( c == '\n' )
               ++line;
            field += c;
         }
         continue;
      }
      switch( c )
      {
      case '"':
         if( !field.empty() )
            fail( line, "quote inside unquoted field" );
         quoted = true;
         row_started = true;
         break;
      case ',':
         end_field();
         row_started = true;
         break;
      case '\r':
         if( pos + 1 < text.size() && text[pos + 1] == '\n' )
            break; // handled by the '\n' branch
         [[fallthrough]];
      case '\n':
         end_row( line );
         ++line;
         break;
      default:
         field += c;
         row_started = true;
      }
   }
   if( quoted )
      fail( line, "unterminated quoted field" );
   if( row_started || !field.empty() )
      end_row( line );

   if( table.header.empty() )
      throw std::runtime_error( "csv: empty input" );
   return table;
}

Table
read_file( const std::string& path )
{
   std::ifstream in( path, std::ios::binary );
   if( !in )
      throw std::runtime_error( "csv: cannot open '" + path + "'" );
   std::ostringstream buf;
   buf << in.rdbuf();
   try
   {
      return parse( buf.str() );
   }
   catch( const std::runtime_error& e )
   {
      throw std::runtime_error( std::string( e.what() ) + " in '" + path +
                                "'" );
   }
}

std::string
escape( std::string_view field )
{
   bool needs_quotes = field.find_first_of( ",\"\n\r" ) !=
                       std::string_view::npos;
   if( !needs_quotes )
      return std::string( field );
   std::string out = "\"";
   for( char c : field )
   {
      if( c == '"' )
         out += '"';
      out += c;
   }
   out += '"';
   return out;
}

} // namespace ppg::csv
