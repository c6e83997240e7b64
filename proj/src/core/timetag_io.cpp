#include <array>
#include <cmath>
#include <string>
#include <fstream>
#include <istream>
#include <ostream>

#include "core/counting.hpp"
#include "core/csv.hpp"
#include "core/error.hpp"

namespace cespdc {

namespace {

constexpr std::array<char, 4> kMagic{'T', 'T', 'A', 'G'};
constexpr std::uint16_t kVersion = 1;

template <class U>
void put_le(std::ostream& out, U v) {
    std::array<char, sizeof(U)> b{};
    for (std::size_t i = 0; i < sizeof(U); ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b.data(), b.size());
}

template <class U>
U get_le(std::istream& in) {
    std::array<unsigned char, sizeof(U)> b{};
    in.read(reinterpret_cast<char*>(b.data()), b.size());
    if (!in) throw IoError("ttag: truncated file");
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(b[i]) << (8 * i);
    return v;
}

}  // namespace

void write_ttag(std::ostream& out, const TimeTagStream& stream) {
    out.write(kMagic.data(), kMagic.size());
    put_le<std::uint16_t>(out, kVersion);
    put_le<std::uint16_t>(out, stream.channel);
    put_le<std::uint64_t>(out, stream.tags_ps.size());
    for (auto t : stream.tags_ps) put_le<std::uint64_t>(out, t);
    if (!out) throw IoError("ttag: write failed");
}

TimeTagStream read_ttag(std::istream& in) {
    std::array<char, 4> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) throw IoError("ttag: bad magic (expected \"TTAG\")");
    const auto version = get_le<std::uint16_t>(in);
    if (version != kVersion) throw IoError("ttag: unsupported version " + std::to_string(version));
    TimeTagStream s;
    s.channel = get_le<std::uint16_t>(in);
    const auto count = get_le<std::uint64_t>(in);
    s.tags_ps.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 26)));
    for (std::uint64_t i = 0; i < count; ++i) s.tags_ps.push_back(get_le<std::uint64_t>(in));
    return s;
}

void write_ttag_file(const std::filesystem::path& path, const TimeTagStream& stream) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    write_ttag(f, stream);
}

TimeTagStream read_ttag_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string());
    return read_ttag(f);
}

void write_tags_csv(std::ostream& out, const TimeTagStream& stream) {
    CsvWriter csv(out, {"channel", "timestamp_ps"});
    for (auto t : stream.tags_ps) csv.row(static_cast<std::uint64_t>(stream.channel), t);
}

void write_histogram_csv(std::ostream& out, const CoincidenceHistogram& hist) {
    CsvWriter csv(out, {"delay_ps", "counts"});
    const auto w = static_cast<std::int64_t>(std::llround(hist.bin_width_s * 1e12));
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
        csv.row((static_cast<std::int64_t>(i) - hist.half_bins) * w, hist.counts[i]);
    }
}

}  // namespace cespdc
