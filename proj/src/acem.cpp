#include "emtk/acem.hpp"

#include <algorithm>

namespace emtk {

DirectionalAverages directional_averages(const CurrentWaveform& w)
{
    w.validate();
    DirectionalAverages a;
    for (const auto& iv : w.intervals) {
        if (iv.density > 0.0) a.plus += iv.duration * iv.density;
        else a.minus -= iv.duration * iv.density;
    }
    a.plus /= w.period;
    a.minus /= w.period;
    return a;
}

EffectiveDensities effective_densities(const DirectionalAverages& avgs, double r)
{
    if (!(r >= 0.0 && r <= 1.0)) throw InputError("recovery factor must lie in [0, 1]");
    EffectiveDensities e;
    e.left_raw = avgs.plus - r * avgs.minus;
    e.right_raw = avgs.minus - r * avgs.plus;
    e.left = std::max(0.0, e.left_raw);
    e.right = std::max(0.0, e.right_raw);
    return e;
}

}  // namespace emtk
