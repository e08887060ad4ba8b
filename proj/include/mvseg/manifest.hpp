#ifndef MVSEG_MANIFEST_HPP
#define MVSEG_MANIFEST_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mvseg/volume.hpp"

namespace mvseg {

enum class Cohort { training, validation, challenge };

std::string to_string(Cohort c);
Cohort cohort_from_string(const std::string& s);

// One manifest row. Paths are stored verbatim; relative paths resolve
// against the manifest's directory when the study is assembled.
struct StudyEntry {
    std::string subject_id;
    std::string vendor;
    std::string pathology;
    Cohort cohort = Cohort::training;
    std::string sa_ed, sa_es, la_ed, la_es;
    std::string sa_ed_gt, sa_es_gt, la_ed_gt, la_es_gt;

    bool has_labels() const { return !sa_ed_gt.empty(); }
    void validate() const;
};

// One subject's matched SA volume + LA slice per cardiac phase.
struct CardiacStudy {
    struct Phase {
        VolumeGrid sa_image;
        VolumeGrid la_image; // exactly one slice before preprocessing
        std::optional<LabelMap> sa_labels;
        std::optional<LabelMap> la_labels;
    };
    std::string subject_id;
    std::string pathology;
    Phase ed, es;

    bool has_labels() const { return ed.sa_labels.has_value(); }
    void validate() const;
};

// CSV schema: subject_id, vendor, pathology, cohort, sa_ed, sa_es, la_ed,
// la_es, sa_ed_gt, sa_es_gt, la_ed_gt, la_es_gt. UTF-8, first row header,
// gt columns may be empty (all four together).
std::vector<StudyEntry> load_manifest(const std::filesystem::path& path);
void write_manifest(const std::vector<StudyEntry>& entries,
                    const std::filesystem::path& path);

CardiacStudy assemble_study(const StudyEntry& entry,
                            const std::filesystem::path& base_dir);

} // namespace mvseg

#endif
