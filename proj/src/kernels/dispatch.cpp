#include "fockprog/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace fockprog::kernels {
namespace {

bool probe_avx2() {
#if defined(FOCKPROG_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

bool cpu_has_avx2() {
    static const bool has = probe_avx2();
    return has;
}

Isa initial_isa() {
    if (const char* env = std::getenv("FOCKPROG_ISA")) {
        const std::string want(env);
        if (want == "scalar") return Isa::scalar;
        if (want == "avx2" && cpu_has_avx2()) return Isa::avx2;
    }
    return detected_isa();
}

std::atomic<Isa>& current() {
    static std::atomic<Isa> isa{initial_isa()};
    return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
    }
    return "unknown";
}

Isa detected_isa() { return cpu_has_avx2() ? Isa::avx2 : Isa::scalar; }

bool isa_available(Isa isa) { return isa == Isa::scalar || (isa == Isa::avx2 && cpu_has_avx2()); }

const KernelTable& table(Isa isa) {
    if (!isa_available(isa))
        throw std::invalid_argument("kernel ISA not available: " + std::string(isa_name(isa)));
#if defined(FOCKPROG_HAVE_AVX2)
    if (isa == Isa::avx2) return avx2::table();
#endif
    return scalar::table();
}

const KernelTable& active() {
#if defined(FOCKPROG_HAVE_AVX2)
    if (current().load(std::memory_order_relaxed) == Isa::avx2) return avx2::table();
#endif
    return scalar::table();
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
    if (!isa_available(isa))
        throw std::invalid_argument("kernel ISA not available: " + std::string(isa_name(isa)));
    current().store(isa, std::memory_order_relaxed);
}

}  // namespace fockprog::kernels
