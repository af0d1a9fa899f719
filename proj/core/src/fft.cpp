#include "epps/fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace epps::fft {

namespace {

struct PlanDeleter {
    void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

fftw_plan plan_for(std::size_t n, int sign) {
    static std::map<std::pair<std::size_t, int>, Plan> cache;
    std::lock_guard lock(planner_mutex());
    auto it = cache.find({n, sign});
    if (it != cache.end()) return it->second.get();
    std::vector<cd> in(n), out(n);
    fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(in.data()),
                                   reinterpret_cast<fftw_complex*>(out.data()), sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (p == nullptr) throw std::runtime_error("fftw: plan creation failed");
    cache.emplace(std::pair{n, sign}, Plan(p));
    return p;
}

std::vector<cd> transform(std::span<const cd> x, int sign) {
    std::vector<cd> in(x.begin(), x.end());
    std::vector<cd> out(x.size());
    if (x.empty()) return out;
    fftw_execute_dft(plan_for(x.size(), sign), reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

}  // namespace

std::vector<cd> forward(std::span<const cd> x) { return transform(x, FFTW_FORWARD); }

std::vector<cd> backward(std::span<const cd> x) { return transform(x, FFTW_BACKWARD); }

std::vector<cd> backward_real(std::span<const double> x) {
    std::vector<cd> z(x.begin(), x.end());
    return transform(z, FFTW_BACKWARD);
}

std::size_t good_size(std::size_t min_size) {
    for (std::size_t n = std::max<std::size_t>(min_size, 1);; ++n) {
        std::size_t m = n;
        for (std::size_t p : {2u, 3u, 5u, 7u}) {
            while (m % p == 0) m /= p;
        }
        if (m == 1) return n;
    }
}

}  // namespace epps::fft
