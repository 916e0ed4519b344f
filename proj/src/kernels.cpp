#include "rsb/kernels.hpp"

#include <atomic>
#include <string>

#include "rsb/error.hpp"

namespace rsb::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(RSB_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

std::atomic<Isa>& active_slot() {
  static std::atomic<Isa> slot{best_isa()};
  return slot;
}

}  // namespace

const char* to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
  }
  return "unknown";
}

Isa parse_isa(std::string_view name) {
  if (name == "scalar") return Isa::Scalar;
  if (name == "avx2") return Isa::Avx2;
  if (name == "auto") return best_isa();
  throw_invalid("unknown kernel ISA '" + std::string(name) + "' (expected scalar, avx2 or auto)");
}

bool isa_supported(Isa isa) {
  static const bool avx2 = cpu_has_avx2();
  return isa == Isa::Scalar || (isa == Isa::Avx2 && avx2);
}

Isa best_isa() { return isa_supported(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar; }

Isa active_isa() { return active_slot().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!isa_supported(isa)) throw_invalid(std::string("kernel ISA not supported on this CPU: ") + to_string(isa));
  active_slot().store(isa, std::memory_order_relaxed);
}

void unit_phasors(Isa isa, std::uint64_t seed, std::uint64_t stream, std::uint64_t first, std::span<double> re,
                  std::span<double> im) {
  if (re.size() != im.size()) throw_invalid("unit_phasors: output spans differ in length");
#if defined(RSB_HAVE_AVX2_TU)
  if (isa == Isa::Avx2) return avx2::unit_phasors(seed, stream, first, re, im);
#endif
  scalar::unit_phasors(seed, stream, first, re, im);
}

void accumulate_moments(Isa isa, std::span<const double> omega, std::span<const double> weight,
                        std::span<const double> c, std::span<const double> s, double center, Moments& m_re,
                        Moments& m_im) {
  if (weight.size() != omega.size() || c.size() != omega.size() || s.size() != omega.size())
    throw_invalid("accumulate_moments: input spans differ in length");
#if defined(RSB_HAVE_AVX2_TU)
  if (isa == Isa::Avx2) return avx2::accumulate_moments(omega, weight, c, s, center, m_re, m_im);
#endif
  scalar::accumulate_moments(omega, weight, c, s, center, m_re, m_im);
}

}  // namespace rsb::kernels
