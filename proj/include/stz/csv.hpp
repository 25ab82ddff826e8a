#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stz::csv {

/// Splits one delimited line. Double-quoted fields may contain the delimiter;
/// a doubled quote inside a quoted field is a literal quote.
std::vector<std::string> split_line(std::string_view line, char delim = ',');

/// Reads the next non-blank line, stripping a trailing '\r'. Returns false at EOF.
bool next_line(std::istream& in, std::string& line);

/// A header row with case-sensitive name lookup.
class Header {
public:
    explicit Header(std::vector<std::string> names);

    std::optional<std::size_t> find(std::string_view name) const;
    std::size_t size() const noexcept { return names_.size(); }
    const std::vector<std::string>& names() const noexcept { return names_; }

private:
    std::vector<std::string> names_;
};

std::string trim(std::string_view s);

/// Quotes a field only if it contains a delimiter, quote or newline.
std::string escape(std::string_view field, char delim = ',');

/// Shortest round-trippable decimal text for a double ("nan"/"inf" for non-finite).
std::string format_number(double v);

}  // namespace stz::csv
