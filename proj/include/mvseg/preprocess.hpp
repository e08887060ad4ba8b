#ifndef MVSEG_PREPROCESS_HPP
#define MVSEG_PREPROCESS_HPP

#include <filesystem>
#include <optional>
#include <string>

#include "mvseg/manifest.hpp"
#include "mvseg/volume.hpp"

namespace mvseg {

enum class Interp { linear, nearest };

constexpr double kTargetSpacingMm = 1.25;
constexpr int kTargetSize = 256;

// Forward in-plane transform bookkeeping, enough to map predictions back to
// the original grid. Origin and out-of-plane geometry are carried along so
// the inverse is self-contained.
struct GeometryRecord {
    int orig_rows = 0, orig_cols = 0;
    int orig_slices = 0;
    double orig_sy = 1.0, orig_sx = 1.0, orig_sz = 1.0;
    double orig_oy = 0.0, orig_ox = 0.0, orig_oz = 0.0;
    int res_rows = 0, res_cols = 0;   // shape after resampling, before crop/pad
    int crop_row0 = 0, crop_col0 = 0; // crop offsets into the resampled grid
    int pad_row0 = 0, pad_col0 = 0;   // zero-pad on the low side
    int target = kTargetSize;
    double target_spacing = kTargetSpacingMm;

    std::string to_json() const;
    static GeometryRecord from_json(const std::string& text);
};

// Matched SA-LA training representation: N x 256 x 256 per view, z-scored
// images, internal labels {0,1,2}, LA replicated to the SA slice count.
struct PreprocessedView {
    VolumeGrid image;
    std::optional<LabelMap> labels;
    GeometryRecord geom;
};
struct PreprocessedPhase {
    PreprocessedView sa;
    PreprocessedView la;
};
struct PreprocessedStudy {
    std::string subject_id;
    std::string pathology;
    PreprocessedPhase ed;
    PreprocessedPhase es;
    void validate() const;
};

// Resamples the in-plane axes to the target spacing; the slice axis is never
// touched. Output in-plane shape = round(shape * spacing / target). Label
// maps require nearest mode.
VolumeGrid resample_inplane(const VolumeGrid& grid, double target_spacing = kTargetSpacingMm,
                            Interp mode = Interp::linear);
LabelMap resample_inplane(const LabelMap& grid, double target_spacing = kTargetSpacingMm,
                          Interp mode = Interp::nearest);

// Center crop when larger, symmetric zero-pad when smaller; an odd remainder
// puts the extra voxel on the high side.
std::pair<VolumeGrid, GeometryRecord> crop_or_pad(const VolumeGrid& grid,
                                                  int target = kTargetSize);
std::pair<LabelMap, GeometryRecord> crop_or_pad(const LabelMap& grid,
                                                int target = kTargetSize);

// Whole-volume zero-mean unit-variance. Constant volumes throw
// DegenerateInputError; preprocess_study maps those to all-zeros.
VolumeGrid zscore(const VolumeGrid& grid);

// Stacks n identical copies of the single LA slice; out-of-plane spacing is
// taken from the matched SA volume for bookkeeping.
VolumeGrid replicate_la(const VolumeGrid& la, int n_slices, double sa_slice_spacing);
LabelMap replicate_la(const LabelMap& la, int n_slices, double sa_slice_spacing);

// Challenge labels {0:bg, 1:LV pool, 2:LV myo, 3:RV} to internal
// {0:bg, 1:LV merged, 2:RV}.
LabelMap remap_labels(const LabelMap& labels);

PreprocessedStudy preprocess_study(const CardiacStudy& study);

// Maps a label map on the fixed 256x256 grid back to the original in-plane
// geometry (nearest neighbor); regions cropped away come back as background.
LabelMap invert_geometry(const LabelMap& labels, const GeometryRecord& rec);

// On-disk cache: one directory per subject with NIfTI volumes plus JSON
// geometry sidecars. Bytes are deterministic, so re-running is idempotent.
void save_preprocessed(const PreprocessedStudy& study, const std::filesystem::path& dir);
PreprocessedStudy load_preprocessed(const std::filesystem::path& dir,
                                    const std::string& subject_id);

} // namespace mvseg

#endif
