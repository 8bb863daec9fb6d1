#include "psymort/csv.hpp"

#include <istream>
#include <ostream>

namespace psymort {

std::optional<std::vector<std::string>> CsvReader::next_record() {
    int ch = in_.get();
    if (ch == std::istream::traits_type::eof()) return std::nullopt;

    record_line_ = line_;
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;

    while (true) {
        if (ch == std::istream::traits_type::eof()) {
            fields.push_back(std::move(field));
            return fields;
        }
        const char c = static_cast<char>(ch);
        if (quoted) {
            if (c == '"') {
                if (in_.peek() == '"') {
                    in_.get();
                    field.push_back('"');
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line_;
                field.push_back(c);
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\r' && in_.peek() == '\n') {
            in_.get();
            ++line_;
            fields.push_back(std::move(field));
            return fields;
        } else if (c == '\n') {
            ++line_;
            fields.push_back(std::move(field));
            return fields;
        } else {
            field.push_back(c);
        }
        ch = in_.get();
    }
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (const char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_csv_row(std::ostream& out, std::span<const std::string> fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.put(',');
        out << csv_escape(fields[i]);
    }
    out.put('\n');
}

}  // namespace psymort
