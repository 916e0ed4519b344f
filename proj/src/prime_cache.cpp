#include <array>
#include <cstring>
#include <fstream>
#include <iterator>

#include "rsb/error.hpp"
#include "rsb/primes.hpp"

namespace rsb {

namespace {

constexpr std::array<char, 8> kMagic = {'R', 'S', 'B', 'P', 'R', 'I', 'M', 'E'};

template <typename T>
void put_le(std::vector<unsigned char>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

template <typename T>
T get_le(const std::vector<unsigned char>& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw_invalid("prime cache truncated in header");
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(in[pos + i]) << (8 * i);
  pos += sizeof(T);
  return v;
}

}  // namespace

void save_prime_cache(const PrimeTable& table, const std::filesystem::path& path) {
  std::vector<unsigned char> buf(kMagic.begin(), kMagic.end());
  put_le<std::uint32_t>(buf, kPrimeCacheVersion);
  put_le<std::uint64_t>(buf, table.limit());
  put_le<std::uint64_t>(buf, table.size());
  std::uint32_t prev = 0;
  for (std::uint32_t p : table.primes()) {
    std::uint32_t gap = p - prev;
    prev = p;
    while (gap >= 0x80) {
      buf.push_back(static_cast<unsigned char>(gap | 0x80));
      gap >>= 7;
    }
    buf.push_back(static_cast<unsigned char>(gap));
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw_invalid("cannot open prime cache for writing: " + path.string());
  os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!os) throw_invalid("failed writing prime cache: " + path.string());
}

PrimeTable load_prime_cache(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw_invalid("cannot open prime cache: " + path.string());
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (buf.size() < kMagic.size() || std::memcmp(buf.data(), kMagic.data(), kMagic.size()) != 0)
    throw_invalid("not a prime cache file (bad magic): " + path.string());
  std::size_t pos = kMagic.size();
  const auto version = get_le<std::uint32_t>(buf, pos);
  if (version != kPrimeCacheVersion) throw_invalid("unsupported prime cache version " + std::to_string(version));
  const auto limit = get_le<std::uint64_t>(buf, pos);
  const auto count = get_le<std::uint64_t>(buf, pos);
  if (limit > 0xFFFFFFFFULL) throw_invalid("prime cache limit out of range");

  std::vector<std::uint32_t> primes;
  primes.reserve(count);
  std::uint64_t prev = 0;
  for (std::uint64_t k = 0; k < count; ++k) {
    std::uint64_t gap = 0;
    int shift = 0;
    for (;;) {
      if (pos >= buf.size() || shift > 28) throw_invalid("prime cache truncated or corrupt");
      const unsigned char byte = buf[pos++];
      gap |= static_cast<std::uint64_t>(byte & 0x7F) << shift;
      if ((byte & 0x80) == 0) break;
      shift += 7;
    }
    prev += gap;
    if (gap == 0 || prev > limit) throw_invalid("prime cache entries are not strictly increasing within limit");
    primes.push_back(static_cast<std::uint32_t>(prev));
  }
  if (pos != buf.size()) throw_invalid("trailing bytes in prime cache");
  return PrimeTable(limit, std::move(primes));
}

}  // namespace rsb
