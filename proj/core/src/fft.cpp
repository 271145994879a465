#include "fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace phychal::detail {
namespace {

// FFTW planning mutates global state; execution via fftw_execute_dft on a
// cached plan is thread-safe. FFTW_UNALIGNED lets one plan serve any buffer.
class plan_cache {
public:
    fftw_plan get(int n, int sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto key = std::make_pair(n, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        std::vector<fftw_complex> scratch(static_cast<std::size_t>(n));
        fftw_plan plan = fftw_plan_dft_1d(n, scratch.data(), scratch.data(),
                                          sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (plan == nullptr) throw std::runtime_error("fft plan creation failed");
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::pair<int, int>, fftw_plan> plans_;
};

plan_cache& cache() {
    static plan_cache instance;
    return instance;
}

void execute(std::span<const std::complex<double>> in,
             std::span<std::complex<double>> out, int sign) {
    if (in.empty()) throw std::invalid_argument("fft: empty input");
    if (in.size() != out.size()) throw std::invalid_argument("fft: size mismatch");
    const int n = static_cast<int>(in.size());
    fftw_plan plan = cache().get(n, sign);
    // fftw_complex and std::complex<double> share layout.
    auto* src = reinterpret_cast<fftw_complex*>(
        const_cast<std::complex<double>*>(in.data()));
    auto* dst = reinterpret_cast<fftw_complex*>(out.data());
    fftw_execute_dft(plan, src, dst);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (auto& v : out) v *= scale;
}

} // namespace

void fft_unitary_forward(std::span<const std::complex<double>> in,
                         std::span<std::complex<double>> out) {
    execute(in, out, FFTW_FORWARD);
}

void fft_unitary_backward(std::span<const std::complex<double>> in,
                          std::span<std::complex<double>> out) {
    execute(in, out, FFTW_BACKWARD);
}

} // namespace phychal::detail
