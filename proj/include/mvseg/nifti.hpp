#ifndef MVSEG_NIFTI_HPP
#define MVSEG_NIFTI_HPP

#include <filesystem>

#include "mvseg/volume.hpp"

namespace mvseg::nifti {

// NIfTI-1 single-file containers (.nii / .nii.gz). Integer-typed containers
// load as LabelMap, floating-point ones as VolumeGrid. Spacing comes from
// pixdim, origin from the sform/qform offsets; the rest of the header is
// carried opaquely and re-emitted on save.
AnyVolume load_volume(const std::filesystem::path& path);

// Loads any numeric container as a scalar grid (integer voxels converted).
VolumeGrid load_image(const std::filesystem::path& path);

// Requires an integer-typed container with values in [0, 255].
LabelMap load_labels(const std::filesystem::path& path);

// Scalar grids are stored as float32, label maps as uint8. A ".gz" suffix
// selects gzip compression. Output bytes are deterministic.
void save_volume(const VolumeGrid& grid, const std::filesystem::path& path);
void save_volume(const LabelMap& grid, const std::filesystem::path& path);

} // namespace mvseg::nifti

#endif
