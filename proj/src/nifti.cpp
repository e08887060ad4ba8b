#include "mvseg/nifti.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>

namespace mvseg::nifti {

namespace fs = std::filesystem;

namespace {

#pragma pack(push, 1)
struct Nifti1Header {
    int32_t sizeof_hdr;    // must be 348
    char data_type[10];
    char db_name[18];
    int32_t extents;
    int16_t session_error;
    char regular;
    char dim_info;
    int16_t dim[8];
    float intent_p1, intent_p2, intent_p3;
    int16_t intent_code;
    int16_t datatype;
    int16_t bitpix;
    int16_t slice_start;
    float pixdim[8];
    float vox_offset;
    float scl_slope;
    float scl_inter;
    int16_t slice_end;
    char slice_code;
    char xyzt_units;
    float cal_max, cal_min;
    float slice_duration;
    float toffset;
    int32_t glmax, glmin;
    char descrip[80];
    char aux_file[24];
    int16_t qform_code, sform_code;
    float quatern_b, quatern_c, quatern_d;
    float qoffset_x, qoffset_y, qoffset_z;
    float srow_x[4], srow_y[4], srow_z[4];
    char intent_name[16];
    char magic[4];
};
#pragma pack(pop)
static_assert(sizeof(Nifti1Header) == 348, "NIfTI-1 header must be 348 bytes");

constexpr int16_t kDtUint8 = 2;
constexpr int16_t kDtInt16 = 4;
constexpr int16_t kDtInt32 = 8;
constexpr int16_t kDtFloat32 = 16;
constexpr int16_t kDtFloat64 = 64;
constexpr int16_t kDtInt8 = 256;
constexpr int16_t kDtUint16 = 512;

template <class T>
void swap_bytes(T& v) {
    auto* p = reinterpret_cast<uint8_t*>(&v);
    for (size_t a = 0, b = sizeof(T) - 1; a < b; ++a, --b) std::swap(p[a], p[b]);
}

void swap_header(Nifti1Header& h) {
    swap_bytes(h.sizeof_hdr);
    swap_bytes(h.extents);
    swap_bytes(h.session_error);
    for (auto& d : h.dim) swap_bytes(d);
    swap_bytes(h.intent_p1);
    swap_bytes(h.intent_p2);
    swap_bytes(h.intent_p3);
    swap_bytes(h.intent_code);
    swap_bytes(h.datatype);
    swap_bytes(h.bitpix);
    swap_bytes(h.slice_start);
    for (auto& d : h.pixdim) swap_bytes(d);
    swap_bytes(h.vox_offset);
    swap_bytes(h.scl_slope);
    swap_bytes(h.scl_inter);
    swap_bytes(h.slice_end);
    swap_bytes(h.cal_max);
    swap_bytes(h.cal_min);
    swap_bytes(h.slice_duration);
    swap_bytes(h.toffset);
    swap_bytes(h.glmax);
    swap_bytes(h.glmin);
    swap_bytes(h.qform_code);
    swap_bytes(h.sform_code);
    swap_bytes(h.quatern_b);
    swap_bytes(h.quatern_c);
    swap_bytes(h.quatern_d);
    swap_bytes(h.qoffset_x);
    swap_bytes(h.qoffset_y);
    swap_bytes(h.qoffset_z);
    for (auto& v : h.srow_x) swap_bytes(v);
    for (auto& v : h.srow_y) swap_bytes(v);
    for (auto& v : h.srow_z) swap_bytes(v);
}

struct GzReader {
    gzFile f = nullptr;
    explicit GzReader(const fs::path& p) {
        // gzopen reads plain files transparently as well.
        f = gzopen(p.string().c_str(), "rb");
    }
    ~GzReader() {
        if (f) gzclose(f);
    }
    bool read_exact(void* dst, size_t n) {
        size_t done = 0;
        auto* out = static_cast<uint8_t*>(dst);
        while (done < n) {
            unsigned chunk = static_cast<unsigned>(
                std::min<size_t>(n - done, 1u << 28));
            int got = gzread(f, out + done, chunk);
            if (got <= 0) return false;
            done += static_cast<size_t>(got);
        }
        return true;
    }
};

struct RawVolume {
    Nifti1Header hdr{};
    std::vector<uint8_t> payload;
    size_t nvox = 0;
};

RawVolume read_container(const fs::path& path) {
    if (!fs::exists(path))
        throw NotFoundError("no such file: " + path.string());

    GzReader rd(path);
    if (!rd.f) throw IoError("cannot open " + path.string());

    RawVolume raw;
    Nifti1Header& h = raw.hdr;
    if (!rd.read_exact(&h, sizeof(h)))
        throw FormatError(path.string() + ": truncated NIfTI header");
    bool swapped = false;
    if (h.sizeof_hdr != 348) {
        swap_header(h);
        swapped = true;
        if (h.sizeof_hdr != 348)
            throw FormatError(path.string() + ": not a NIfTI-1 container");
    }
    if (std::memcmp(h.magic, "n+1", 4) != 0)
        throw FormatError(path.string() + ": only single-file NIfTI-1 (magic n+1) is supported");

    int ndim = h.dim[0];
    if (ndim < 1 || ndim > 7)
        throw FormatError(path.string() + ": bad dim[0]");
    for (int d = 4; d <= ndim; ++d)
        if (h.dim[d] > 1)
            throw FormatError(path.string() + ": >3D volumes are not supported");
    int nx = h.dim[1];
    int ny = ndim >= 2 ? h.dim[2] : 1;
    int nz = ndim >= 3 ? h.dim[3] : 1;
    if (nx < 1 || ny < 1 || nz < 1)
        throw FormatError(path.string() + ": dimensions must be >= 1");
    for (int d = 1; d <= std::min(ndim, 3); ++d)
        if (!(h.pixdim[d] > 0.0f))
            throw FormatError(path.string() + ": non-positive voxel spacing");

    int bytes_per_voxel;
    switch (h.datatype) {
        case kDtUint8:
        case kDtInt8: bytes_per_voxel = 1; break;
        case kDtInt16:
        case kDtUint16: bytes_per_voxel = 2; break;
        case kDtInt32:
        case kDtFloat32: bytes_per_voxel = 4; break;
        case kDtFloat64: bytes_per_voxel = 8; break;
        default:
            throw FormatError(path.string() + ": unsupported datatype " +
                              std::to_string(h.datatype));
    }

    size_t offset = static_cast<size_t>(h.vox_offset);
    if (offset < sizeof(Nifti1Header))
        throw FormatError(path.string() + ": bad vox_offset");
    size_t skip = offset - sizeof(Nifti1Header);
    std::vector<uint8_t> scratch(skip);
    if (skip > 0 && !rd.read_exact(scratch.data(), skip))
        throw FormatError(path.string() + ": truncated before voxel data");

    raw.nvox = static_cast<size_t>(nx) * ny * nz;
    raw.payload.resize(raw.nvox * bytes_per_voxel);
    if (!rd.read_exact(raw.payload.data(), raw.payload.size()))
        throw FormatError(path.string() + ": truncated voxel data");
    if (swapped) {
        uint8_t* p = raw.payload.data();
        for (size_t i = 0; i < raw.nvox; ++i, p += bytes_per_voxel)
            for (int a = 0, b = bytes_per_voxel - 1; a < b; ++a, --b)
                std::swap(p[a], p[b]);
    }
    return raw;
}

template <class Grid>
void fill_geometry(Grid& g, const Nifti1Header& h, int nx, int ny, int nz) {
    g.cols = nx;
    g.rows = ny;
    g.slices = nz;
    g.sx = h.pixdim[1];
    g.sy = h.dim[0] >= 2 ? h.pixdim[2] : 1.0;
    g.sz = h.dim[0] >= 3 ? h.pixdim[3] : 1.0;
    if (h.sform_code > 0) {
        g.ox = h.srow_x[3];
        g.oy = h.srow_y[3];
        g.oz = h.srow_z[3];
    } else if (h.qform_code > 0) {
        g.ox = h.qoffset_x;
        g.oy = h.qoffset_y;
        g.oz = h.qoffset_z;
    }
    g.header_blob.resize(sizeof(Nifti1Header));
    std::memcpy(g.header_blob.data(), &h, sizeof(Nifti1Header));
}

template <class Src, class Dst>
void convert_payload(const std::vector<uint8_t>& payload, size_t nvox,
                     std::vector<Dst>& out) {
    out.resize(nvox);
    const Src* src = reinterpret_cast<const Src*>(payload.data());
    for (size_t i = 0; i < nvox; ++i) out[i] = static_cast<Dst>(src[i]);
}

bool is_integer_dtype(int16_t dt) {
    return dt == kDtUint8 || dt == kDtInt8 || dt == kDtInt16 ||
           dt == kDtUint16 || dt == kDtInt32;
}

VolumeGrid to_image(const RawVolume& raw, const fs::path& path) {
    const Nifti1Header& h = raw.hdr;
    VolumeGrid g;
    fill_geometry(g, h, h.dim[1], h.dim[0] >= 2 ? h.dim[2] : 1,
                  h.dim[0] >= 3 ? h.dim[3] : 1);
    switch (h.datatype) {
        case kDtUint8: convert_payload<uint8_t>(raw.payload, raw.nvox, g.data); break;
        case kDtInt8: convert_payload<int8_t>(raw.payload, raw.nvox, g.data); break;
        case kDtInt16: convert_payload<int16_t>(raw.payload, raw.nvox, g.data); break;
        case kDtUint16: convert_payload<uint16_t>(raw.payload, raw.nvox, g.data); break;
        case kDtInt32: convert_payload<int32_t>(raw.payload, raw.nvox, g.data); break;
        case kDtFloat32: convert_payload<float>(raw.payload, raw.nvox, g.data); break;
        case kDtFloat64: convert_payload<double>(raw.payload, raw.nvox, g.data); break;
        default: throw FormatError(path.string() + ": unsupported datatype");
    }
    if (h.scl_slope != 0.0f && (h.scl_slope != 1.0f || h.scl_inter != 0.0f))
        for (auto& v : g.data) v = v * h.scl_slope + h.scl_inter;
    return g;
}

template <class Src>
void convert_labels(const std::vector<uint8_t>& payload, size_t nvox,
                    std::vector<uint8_t>& out, const fs::path& path) {
    out.resize(nvox);
    const Src* src = reinterpret_cast<const Src*>(payload.data());
    for (size_t i = 0; i < nvox; ++i) {
        auto v = src[i];
        if (v < 0 || static_cast<int64_t>(v) > 255)
            throw FormatError(path.string() + ": label value out of [0,255]");
        out[i] = static_cast<uint8_t>(v);
    }
}

LabelMap to_labels(const RawVolume& raw, const fs::path& path) {
    const Nifti1Header& h = raw.hdr;
    if (!is_integer_dtype(h.datatype))
        throw FormatError(path.string() + ": label map must use an integer voxel type");
    if (h.scl_slope != 0.0f && (h.scl_slope != 1.0f || h.scl_inter != 0.0f))
        throw FormatError(path.string() + ": scaled label maps are not supported");
    LabelMap g;
    fill_geometry(g, h, h.dim[1], h.dim[0] >= 2 ? h.dim[2] : 1,
                  h.dim[0] >= 3 ? h.dim[3] : 1);
    switch (h.datatype) {
        case kDtUint8: g.data = raw.payload; break;
        case kDtInt8: convert_labels<int8_t>(raw.payload, raw.nvox, g.data, path); break;
        case kDtInt16: convert_labels<int16_t>(raw.payload, raw.nvox, g.data, path); break;
        case kDtUint16: convert_labels<uint16_t>(raw.payload, raw.nvox, g.data, path); break;
        case kDtInt32: convert_labels<int32_t>(raw.payload, raw.nvox, g.data, path); break;
        default: throw FormatError(path.string() + ": unsupported label datatype");
    }
    return g;
}

template <class T>
Nifti1Header make_header(const Grid<T>& g, int16_t datatype, int16_t bitpix) {
    Nifti1Header h{};
    if (g.header_blob.size() == sizeof(Nifti1Header))
        std::memcpy(&h, g.header_blob.data(), sizeof(Nifti1Header));
    h.sizeof_hdr = 348;
    h.regular = 'r';
    h.dim[0] = 3;
    h.dim[1] = static_cast<int16_t>(g.cols);
    h.dim[2] = static_cast<int16_t>(g.rows);
    h.dim[3] = static_cast<int16_t>(g.slices);
    for (int d = 4; d < 8; ++d) h.dim[d] = 1;
    h.datatype = datatype;
    h.bitpix = bitpix;
    if (h.pixdim[0] == 0.0f) h.pixdim[0] = 1.0f;
    h.pixdim[1] = static_cast<float>(g.sx);
    h.pixdim[2] = static_cast<float>(g.sy);
    h.pixdim[3] = static_cast<float>(g.sz);
    h.vox_offset = 352.0f;
    h.scl_slope = 1.0f;
    h.scl_inter = 0.0f;
    if (g.header_blob.empty()) {
        std::snprintf(h.descrip, sizeof(h.descrip), "mvseg");
        h.qform_code = 0;
        h.sform_code = 1;
        h.srow_x[0] = static_cast<float>(g.sx);
        h.srow_y[1] = static_cast<float>(g.sy);
        h.srow_z[2] = static_cast<float>(g.sz);
        h.srow_x[3] = static_cast<float>(g.ox);
        h.srow_y[3] = static_cast<float>(g.oy);
        h.srow_z[3] = static_cast<float>(g.oz);
        h.xyzt_units = 2; // mm
    } else {
        // keep orientation bytes from the source header, refresh offsets
        h.srow_x[3] = static_cast<float>(g.ox);
        h.srow_y[3] = static_cast<float>(g.oy);
        h.srow_z[3] = static_cast<float>(g.oz);
    }
    std::memcpy(h.magic, "n+1", 4);
    return h;
}

void write_bytes(const fs::path& path, const Nifti1Header& h, const void* data,
                 size_t nbytes) {
    fs::path parent = path.parent_path();
    if (!parent.empty() && !fs::exists(parent))
        throw IoError("parent directory does not exist: " + parent.string());

    const char ext_flag[4] = {0, 0, 0, 0};
    bool gz = path.extension() == ".gz";
    if (gz) {
        gzFile f = gzopen(path.string().c_str(), "wb6");
        if (!f) throw IoError("cannot open for writing: " + path.string());
        bool ok = gzwrite(f, &h, sizeof(h)) == static_cast<int>(sizeof(h)) &&
                  gzwrite(f, ext_flag, 4) == 4;
        size_t done = 0;
        const auto* p = static_cast<const uint8_t*>(data);
        while (ok && done < nbytes) {
            unsigned chunk = static_cast<unsigned>(
                std::min<size_t>(nbytes - done, 1u << 28));
            ok = gzwrite(f, p + done, chunk) == static_cast<int>(chunk);
            done += chunk;
        }
        int rc = gzclose(f);
        if (!ok || rc != Z_OK) throw IoError("write failed: " + path.string());
    } else {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open for writing: " + path.string());
        f.write(reinterpret_cast<const char*>(&h), sizeof(h));
        f.write(ext_flag, 4);
        f.write(static_cast<const char*>(data), static_cast<std::streamsize>(nbytes));
        if (!f) throw IoError("write failed: " + path.string());
    }
}

} // namespace

AnyVolume load_volume(const fs::path& path) {
    RawVolume raw = read_container(path);
    if (is_integer_dtype(raw.hdr.datatype)) return to_labels(raw, path);
    return to_image(raw, path);
}

VolumeGrid load_image(const fs::path& path) {
    RawVolume raw = read_container(path);
    return to_image(raw, path);
}

LabelMap load_labels(const fs::path& path) {
    RawVolume raw = read_container(path);
    return to_labels(raw, path);
}

void save_volume(const VolumeGrid& grid, const fs::path& path) {
    grid.validate("volume");
    Nifti1Header h = make_header(grid, kDtFloat32, 32);
    write_bytes(path, h, grid.data.data(), grid.data.size() * sizeof(float));
}

void save_volume(const LabelMap& grid, const fs::path& path) {
    grid.validate("label map");
    Nifti1Header h = make_header(grid, kDtUint8, 8);
    write_bytes(path, h, grid.data.data(), grid.data.size());
}

} // namespace mvseg::nifti
