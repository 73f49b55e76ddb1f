#include <atomic>
#include <stdexcept>

#include "racorn/kernels.hpp"

namespace racorn::kernels {

const Table* avx2_compiled_table();

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Table* detect() {
    if (const Table* t = avx2_table()) return t;
    return &scalar_table();
}

std::atomic<const Table*>& slot() {
    static std::atomic<const Table*> current{detect()};
    return current;
}

}  // namespace

const Table* avx2_table() {
    static const Table* table = cpu_has_avx2() ? avx2_compiled_table() : nullptr;
    return table;
}

const Table& active() { return *slot().load(std::memory_order_acquire); }

void set_backend(Backend backend) {
    switch (backend) {
        case Backend::automatic:
            slot().store(detect(), std::memory_order_release);
            return;
        case Backend::scalar:
            slot().store(&scalar_table(), std::memory_order_release);
            return;
        case Backend::avx2:
            if (const Table* t = avx2_table()) {
                slot().store(t, std::memory_order_release);
                return;
            }
            throw std::runtime_error("AVX2 kernels are not available on this machine");
    }
}

Backend parse_backend(const std::string& text) {
    if (text == "auto") return Backend::automatic;
    if (text == "scalar") return Backend::scalar;
    if (text == "avx2") return Backend::avx2;
    throw std::invalid_argument("unknown SIMD backend '" + text + "' (expected auto, scalar or avx2)");
}

}  // namespace racorn::kernels
