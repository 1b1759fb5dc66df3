#include "fft.hpp"

#include <map>
#include <mutex>
#include <utility>

#include <fftw3.h>

namespace isac::detail {

namespace {

class PlanCache {
public:
    ~PlanCache()
    {
        for (auto& [key, plan] : plans_) {
            fftw_destroy_plan(plan);
        }
    }

    fftw_plan get(std::size_t n, FftDirection dir)
    {
        std::lock_guard lock(mutex_);
        const auto key = std::make_pair(n, dir);
        if (auto it = plans_.find(key); it != plans_.end()) {
            return it->second;
        }
        auto* scratch = fftw_alloc_complex(n);
        const int sign = dir == FftDirection::forward ? FFTW_FORWARD : FFTW_BACKWARD;
        fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), scratch, scratch, sign,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(scratch);
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::pair<std::size_t, FftDirection>, fftw_plan> plans_;
};

PlanCache& cache()
{
    static PlanCache instance;
    return instance;
}

} // namespace

void fft_inplace(std::span<cplx> data, FftDirection dir)
{
    if (data.size() <= 1) {
        return;
    }
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(cache().get(data.size(), dir), buf, buf);
}

} // namespace isac::detail
