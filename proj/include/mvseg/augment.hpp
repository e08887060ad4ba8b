#ifndef MVSEG_AUGMENT_HPP
#define MVSEG_AUGMENT_HPP

#include <cstdint>
#include <vector>

#include "mvseg/errors.hpp"
#include "mvseg/rng.hpp"

namespace mvseg {

// Stochastic geometric augmentation for matched 2D SA/LA slice pairs:
// random horizontal/vertical flips, rotation, zoom. One transform is drawn
// per view (independently by default, since the views are not pixelwise
// registered) and applied identically to an image and its own labels.
struct AugmentPolicy {
    double p_flip_h = 0.5;
    double p_flip_v = 0.5;
    double max_rot_deg = 15.0;
    double zoom_min = 0.9;
    double zoom_max = 1.1;
    bool independent_views = true;

    void validate() const {
        if (p_flip_h < 0 || p_flip_h > 1 || p_flip_v < 0 || p_flip_v > 1)
            throw ValidationError("flip probabilities must lie in [0,1]");
        if (max_rot_deg < 0) throw ValidationError("rotation range must be >= 0");
        if (!(zoom_min <= 1.0) || !(zoom_max >= 1.0) || !(zoom_min > 0))
            throw ValidationError("zoom range must satisfy 0 < zmin <= 1 <= zmax");
    }
};

// 2D slice with its label plane; both row-major rows x cols.
struct SlicePair {
    int rows = 0, cols = 0;
    std::vector<float> image;
    std::vector<uint8_t> labels;
};

// Drawn transform parameters; exposed so tests can apply fixed transforms.
struct DrawnTransform {
    bool flip_h = false, flip_v = false;
    double rot_deg = 0.0;
    double zoom = 1.0;
};

DrawnTransform draw_transform(const AugmentPolicy& policy, Rng& rng);

// Rotation/zoom about the slice center, zero background; image bilinear,
// labels nearest. Shape is unchanged.
void apply_transform(SlicePair& slice, const DrawnTransform& t);

// Applies one drawn transform per view (shared when independent_views is
// false) to the matched pair.
void augment_pair(SlicePair& sa, SlicePair& la, const AugmentPolicy& policy,
                  Rng& rng);

} // namespace mvseg

#endif
