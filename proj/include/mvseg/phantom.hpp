#ifndef MVSEG_PHANTOM_HPP
#define MVSEG_PHANTOM_HPP

#include <filesystem>

#include "mvseg/manifest.hpp"

namespace mvseg {

// Synthetic multi-view cardiac study: an analytic left ventricle (blood pool
// ellipsoid inside a myocardial shell) with a crescent-shaped right ventricle
// hugging it. The SA volume slices the field axially; the LA image is one
// orthogonal reslice of the same field, so the two views are geometrically
// consistent by construction. Labels use the challenge convention
// {0:bg, 1:LV pool, 2:LV myo, 3:RV}.
struct PhantomParams {
    int slices = 10, rows = 288, cols = 288;
    double sx = 1.0, sy = 1.0, sz = 10.0;

    double la_row_spacing = 1.0; // LA rows sample the long axis

    double lv_radius_mm = 26.0;      // in-plane endocardial semi-axis
    double lv_long_radius_mm = 46.0; // long-axis semi-axis
    double myo_thickness_mm = 9.0;
    double rv_offset_mm = 36.0; // RV center offset from the LV center
    double rv_radius_mm = 30.0;
    double rv_long_radius_mm = 42.0;

    double ed_factor = 1.0; // per-phase contraction, ES < ED, both in (0,1]
    double es_factor = 0.72;

    double mean_bg = 20.0, mean_lv = 200.0, mean_myo = 110.0, mean_rv = 170.0;
    double noise_sigma = 6.0;

    double jitter_shift_mm = 6.0; // random heart placement per subject
    double jitter_rot_deg = 12.0;
    double jitter_scale = 0.08;

    uint64_t seed = 0;

    void validate() const;
};

CardiacStudy generate_phantom(const PhantomParams& params);

// Writes n studies (ED+ES, SA+LA, images+labels) plus a manifest CSV and
// returns the manifest path. Pathology tags cycle through a fixed list so
// stratified reports have groups to aggregate.
std::filesystem::path generate_dataset(int n, uint64_t seed,
                                       const std::filesystem::path& out_dir,
                                       const PhantomParams& base = {});

} // namespace mvseg

#endif
