#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace psymort {

/// Streaming RFC 4180 reader: quoted fields, embedded commas, escaped quotes
/// and embedded line breaks. Accepts both LF and CRLF records.
class CsvReader {
public:
    explicit CsvReader(std::istream& in) : in_(in) {}

    /// Next record, or nullopt at end of input. A trailing newline does not
    /// produce an empty record.
    std::optional<std::vector<std::string>> next_record();

    /// 1-based line on which the most recent record started.
    long record_line() const { return record_line_; }

private:
    std::istream& in_;
    long line_ = 1;
    long record_line_ = 0;
};

/// Quotes a field if it contains a comma, quote or line break.
std::string csv_escape(const std::string& field);

void write_csv_row(std::ostream& out, std::span<const std::string> fields);

}  // namespace psymort
