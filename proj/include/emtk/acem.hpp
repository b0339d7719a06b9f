// Bidirectional (AC) currents reduced to per-end effective DC densities.
#pragma once

#include "emtk/model.hpp"

namespace emtk {

struct DirectionalAverages {
    double plus = 0.0;   // time average of max(j, 0)
    double minus = 0.0;  // time average of max(-j, 0)
};

DirectionalAverages directional_averages(const CurrentWaveform& w);

struct EffectiveDensities {
    double left = 0.0;       // clamped at 0, used for stress analysis
    double right = 0.0;
    double left_raw = 0.0;   // J+ - r J-
    double right_raw = 0.0;  // J- - r J+
};

/// Throws InputError unless 0 <= r <= 1.
EffectiveDensities effective_densities(const DirectionalAverages& avgs, double r);

}  // namespace emtk
