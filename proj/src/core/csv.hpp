#pragma once

#include <concepts>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <string>
#include <string_view>
#include <type_traits>

namespace cespdc {

// Shortest round-trip text for a double, independent of the global locale.
std::string format_number(double v);

/// Writes a header line then rows of numbers/strings, LF line endings, no
/// locale dependence.
class CsvWriter {
public:
    CsvWriter(std::ostream& out, std::initializer_list<std::string_view> header);

    template <class... Fields>
    void row(const Fields&... fields) {
        bool first = true;
        ((put_sep(first), put(fields)), ...);
        end_row();
    }

private:
    void put_sep(bool& first);
    void put(double v);
    void put(std::int64_t v);
    void put(std::uint64_t v);
    void put(std::string_view v);
    template <std::integral I>
        requires(!std::same_as<I, std::int64_t> && !std::same_as<I, std::uint64_t>)
    void put(I v) {
        if constexpr (std::is_signed_v<I>) put(static_cast<std::int64_t>(v));
        else put(static_cast<std::uint64_t>(v));
    }
    void end_row();

    std::ostream& out_;
};

}  // namespace cespdc
