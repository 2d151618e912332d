#ifndef PPG_CSV_HPP
#define PPG_CSV_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ppg::csv
{

/// A parsed delimited text file: one header row plus zero or more data rows,
/// every row padded/checked to the header width.
struct Table
{
   std::vector<std::string> header;
   std::vector<std::vector<std::string>> rows;

   /// Index of a named column, or nullopt when absent.
   std::optional<std::size_t>
   column( std::string_view name ) const
   {
      for( std::size_t j = 0; j < header.size(); ++j )
         if( header[j] == name )
            return j;
      return std::nullopt;
   }
};

/// Parse RFC-4180-style CSV text: comma separated, double-quote quoting,
/// doubled quotes inside quoted fields, LF or CRLF line ends.  Throws
/// std::runtime_error with a 1-based line number on malformed input or on a
/// row whose width differs from the header.
Table
parse( std::string_view text );

/// Read and parse a CSV file; throws std::runtime_error when the file cannot
/// be opened or fails to parse.
Table
read_file( const std::string& path );

/// Quote a field for CSV output when it contains a comma, quote or newline.
std::string
escape( std::string_view field );

} // namespace ppg::csv

#endif
