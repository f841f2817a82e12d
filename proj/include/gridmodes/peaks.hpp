#pragma once

// Interior local-maximum detection with topographic prominence on a sampled
// series. Endpoints are never peaks; a peak's prominence is its height above
// the higher of the two valley floors separating it from taller terrain.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace gridmodes {

struct Peak {
    size_t index = 0;
    double value = 0.0;
    double prominence = 0.0;
};

inline std::vector<Peak> find_series_peaks(const std::vector<double>& y, double min_prominence) {
    std::vector<Peak> out;
    const size_t n = y.size();
    if (n < 3) return out;
    for (size_t i = 1; i + 1 < n; ++i) {
        if (!std::isfinite(y[i])) continue;
        // plateau-tolerant local max: strictly above the previous distinct
        // value and at least as high as the next
        if (!(y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;
        // walk left until terrain taller than y[i]; record the valley floor
        double left_min = y[i];
        for (size_t k = i; k-- > 0;) {
            if (!std::isfinite(y[k])) { left_min = -std::numeric_limits<double>::infinity(); break; }
            left_min = std::min(left_min, y[k]);
            if (y[k] > y[i]) break;
        }
        double right_min = y[i];
        for (size_t k = i + 1; k < n; ++k) {
            if (!std::isfinite(y[k])) { right_min = -std::numeric_limits<double>::infinity(); break; }
            right_min = std::min(right_min, y[k]);
            if (y[k] > y[i]) break;
        }
        const double prominence = y[i] - std::max(left_min, right_min);
        if (prominence >= min_prominence)
            out.push_back({i, y[i], prominence});
    }
    return out;
}

inline double series_median(std::vector<double> v) {
    v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return !std::isfinite(x); }),
            v.end());
    if (v.empty()) return 0.0;
    const size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    return v[mid];
}

} // namespace gridmodes
