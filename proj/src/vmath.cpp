#include "gearnet/tensor.hpp"

#include <cstdint>
#include <cstring>

namespace gearnet::kernel {

namespace {

using Vec8 = double __attribute__((vector_size(64)));
using Int8 = std::int64_t __attribute__((vector_size(64)));
constexpr std::size_t kLanes = 8;

// tanh(x) = m / (m + 2) with m = expm1(2|x|), sign restored afterwards.
// expm1 is evaluated as 2^k·expm1(r) + (2^k - 1) with |r| <= ln2/2 and a
// series for expm1(r), which keeps full relative accuracy near zero.
// Inputs are clamped at |x| = 20, where tanh already rounds to 1.
inline Vec8 tanh8(Vec8 x) noexcept {
    const Int8 sign_mask = Int8{} + static_cast<std::int64_t>(0x8000000000000000ULL);
    const Int8 bits = reinterpret_cast<Int8>(x);
    const Int8 sign = bits & sign_mask;
    Vec8 ax = reinterpret_cast<Vec8>(bits & ~sign_mask);
    ax = ax > 20.0 ? 20.0 : ax;  // NaN fails the test and passes through
    const Vec8 y = 2.0 * ax;

    constexpr double kInvLn2 = 1.4426950408889634;
    constexpr double kLn2Hi = 6.93147180369123816490e-01;
    constexpr double kLn2Lo = 1.90821492927058770002e-10;
    constexpr double kRound = 6755399441055744.0;  // 1.5·2^52: adding it rounds to an integer
    const Vec8 shifted = y * kInvLn2 + kRound;
    const Vec8 kf = shifted - kRound;
    const Vec8 r = (y - kf * kLn2Hi) - kf * kLn2Lo;

    Vec8 q = r * (1.0 / 87178291200.0) + 1.0 / 6227020800.0;
    q = q * r + 1.0 / 479001600.0;
    q = q * r + 1.0 / 39916800.0;
    q = q * r + 1.0 / 3628800.0;
    q = q * r + 1.0 / 362880.0;
    q = q * r + 1.0 / 40320.0;
    q = q * r + 1.0 / 5040.0;
    q = q * r + 1.0 / 720.0;
    q = q * r + 1.0 / 120.0;
    q = q * r + 1.0 / 24.0;
    q = q * r + 1.0 / 6.0;
    q = q * r + 0.5;
    const Vec8 em1_r = r + r * r * q;

    const Int8 k = reinterpret_cast<Int8>(shifted) & 0xfff;  // 0 <= k <= 58
    const Vec8 scale = reinterpret_cast<Vec8>((k + 1023) << 52);
    const Vec8 m = scale * em1_r + (scale - 1.0);
    const Vec8 t = m / (m + 2.0);
    return reinterpret_cast<Vec8>(reinterpret_cast<Int8>(t) | sign);
}

inline Vec8 load(const double* p) noexcept {
    Vec8 v;
    std::memcpy(&v, p, sizeof v);
    return v;
}

inline void store(double* p, Vec8 v) noexcept { std::memcpy(p, &v, sizeof v); }

// Applies f to every element. Each lane is computed independently, so a
// value's result does not depend on its position in the buffer.
template <typename F>
void apply(double* v, std::size_t n, F f) noexcept {
    std::size_t i = 0;
    // Four independent vectors per round hide the latency of the series.
    for (; i + 4 * kLanes <= n; i += 4 * kLanes) {
        const Vec8 a = f(load(v + i)), b = f(load(v + i + kLanes));
        const Vec8 c = f(load(v + i + 2 * kLanes)), d = f(load(v + i + 3 * kLanes));
        store(v + i, a);
        store(v + i + kLanes, b);
        store(v + i + 2 * kLanes, c);
        store(v + i + 3 * kLanes, d);
    }
    for (; i + kLanes <= n; i += kLanes) store(v + i, f(load(v + i)));
    if (i < n) {
        Vec8 tail{};
        std::memcpy(&tail, v + i, (n - i) * sizeof(double));
        tail = f(tail);
        std::memcpy(v + i, &tail, (n - i) * sizeof(double));
    }
}

}  // namespace

void tanh_inplace(double* v, std::size_t n) noexcept { apply(v, n, tanh8); }

void sigmoid_inplace(double* v, std::size_t n) noexcept {
    // sigmoid(x) = (1 + tanh(x/2)) / 2 cannot overflow for any x.
    apply(v, n, [](Vec8 x) { return 0.5 * tanh8(0.5 * x) + 0.5; });
}

}  // namespace gearnet::kernel
