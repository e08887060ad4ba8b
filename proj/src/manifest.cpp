#include "mvseg/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "mvseg/nifti.hpp"

namespace mvseg {

namespace fs = std::filesystem;

std::string to_string(Cohort c) {
    switch (c) {
        case Cohort::training: return "training";
        case Cohort::validation: return "validation";
        case Cohort::challenge: return "challenge";
    }
    return "training";
}

Cohort cohort_from_string(const std::string& s) {
    if (s == "training") return Cohort::training;
    if (s == "validation") return Cohort::validation;
    if (s == "challenge") return Cohort::challenge;
    throw FormatError("unknown cohort: '" + s + "'");
}

void StudyEntry::validate() const {
    if (subject_id.empty()) throw ValidationError("manifest entry without subject_id");
    if (sa_ed.empty() || sa_es.empty() || la_ed.empty() || la_es.empty())
        throw ValidationError(subject_id + ": all four image paths are required");
    int gt = (sa_ed_gt.empty() ? 0 : 1) + (sa_es_gt.empty() ? 0 : 1) +
             (la_ed_gt.empty() ? 0 : 1) + (la_es_gt.empty() ? 0 : 1);
    if (gt != 0 && gt != 4)
        throw ValidationError(subject_id + ": label paths must be all present or all absent");
}

void CardiacStudy::validate() const {
    for (const Phase* p : {&ed, &es}) {
        p->sa_image.validate(subject_id + " SA image");
        p->la_image.validate(subject_id + " LA image");
        if (p->la_image.slices != 1)
            throw ValidationError(subject_id + ": LA image must have exactly one slice");
        if (p->sa_labels && !p->sa_labels->same_geometry(p->sa_image))
            throw ValidationError(subject_id + ": SA label geometry differs from image");
        if (p->la_labels && !p->la_labels->same_geometry(p->la_image))
            throw ValidationError(subject_id + ": LA label geometry differs from image");
        if (p->sa_labels.has_value() != p->la_labels.has_value())
            throw ValidationError(subject_id + ": SA/LA labels must be present together");
    }
    if (ed.sa_labels.has_value() != es.sa_labels.has_value())
        throw ValidationError(subject_id + ": ED/ES labels must be present together");
}

namespace {

// Minimal RFC-4180-style row parsing; quotes may wrap any field.
std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    out.push_back(field);
    return out;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

const char* kColumns[12] = {"subject_id", "vendor", "pathology", "cohort",
                            "sa_ed",      "sa_es",  "la_ed",     "la_es",
                            "sa_ed_gt",   "sa_es_gt", "la_ed_gt", "la_es_gt"};

} // namespace

std::vector<StudyEntry> load_manifest(const fs::path& path) {
    if (!fs::exists(path)) throw NotFoundError("no such manifest: " + path.string());
    std::ifstream f(path);
    if (!f) throw IoError("cannot open manifest: " + path.string());

    std::string line;
    if (!std::getline(f, line))
        throw FormatError(path.string() + ": empty manifest (missing header)");
    std::vector<std::string> header = split_csv_row(line);
    std::map<std::string, size_t> col;
    for (size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    for (const char* name : kColumns)
        if (!col.count(name))
            throw FormatError(path.string() + ": missing required column '" + name + "'");

    std::vector<StudyEntry> entries;
    std::set<std::string> seen;
    size_t row_no = 1;
    while (std::getline(f, line)) {
        ++row_no;
        if (line.empty() || line == "\r") continue;
        std::vector<std::string> cells = split_csv_row(line);
        auto get = [&](const char* name) -> std::string {
            size_t i = col.at(name);
            return i < cells.size() ? cells[i] : std::string();
        };
        StudyEntry e;
        e.subject_id = get("subject_id");
        e.vendor = get("vendor");
        e.pathology = get("pathology");
        e.cohort = cohort_from_string(get("cohort"));
        e.sa_ed = get("sa_ed");
        e.sa_es = get("sa_es");
        e.la_ed = get("la_ed");
        e.la_es = get("la_es");
        e.sa_ed_gt = get("sa_ed_gt");
        e.sa_es_gt = get("sa_es_gt");
        e.la_ed_gt = get("la_ed_gt");
        e.la_es_gt = get("la_es_gt");
        e.validate();
        if (!seen.insert(e.subject_id).second)
            throw ValidationError(path.string() + " row " + std::to_string(row_no) +
                                  ": duplicate subject_id '" + e.subject_id + "'");
        entries.push_back(std::move(e));
    }
    return entries;
}

void write_manifest(const std::vector<StudyEntry>& entries, const fs::path& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot write manifest: " + path.string());
    for (size_t i = 0; i < 12; ++i) f << kColumns[i] << (i + 1 < 12 ? "," : "\n");
    for (const StudyEntry& e : entries) {
        e.validate();
        f << csv_escape(e.subject_id) << ',' << csv_escape(e.vendor) << ','
          << csv_escape(e.pathology) << ',' << to_string(e.cohort) << ','
          << csv_escape(e.sa_ed) << ',' << csv_escape(e.sa_es) << ','
          << csv_escape(e.la_ed) << ',' << csv_escape(e.la_es) << ','
          << csv_escape(e.sa_ed_gt) << ',' << csv_escape(e.sa_es_gt) << ','
          << csv_escape(e.la_ed_gt) << ',' << csv_escape(e.la_es_gt) << '\n';
    }
    if (!f) throw IoError("write failed: " + path.string());
}

namespace {

fs::path resolve(const std::string& p, const fs::path& base) {
    fs::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
}

void check_challenge_labels(const LabelMap& m, const std::string& what) {
    for (uint8_t v : m.data)
        if (v > 3)
            throw ValidationError(what + ": label value " + std::to_string(v) +
                                  " outside challenge set {0,1,2,3}");
}

CardiacStudy::Phase load_phase(const StudyEntry& e, const fs::path& base,
                               bool ed) {
    CardiacStudy::Phase ph;
    ph.sa_image = nifti::load_image(resolve(ed ? e.sa_ed : e.sa_es, base));
    ph.la_image = nifti::load_image(resolve(ed ? e.la_ed : e.la_es, base));
    if (e.has_labels()) {
        ph.sa_labels = nifti::load_labels(resolve(ed ? e.sa_ed_gt : e.sa_es_gt, base));
        ph.la_labels = nifti::load_labels(resolve(ed ? e.la_ed_gt : e.la_es_gt, base));
        check_challenge_labels(*ph.sa_labels, e.subject_id + " SA labels");
        check_challenge_labels(*ph.la_labels, e.subject_id + " LA labels");
    }
    return ph;
}

} // namespace

CardiacStudy assemble_study(const StudyEntry& entry, const fs::path& base_dir) {
    entry.validate();
    CardiacStudy study;
    study.subject_id = entry.subject_id;
    study.pathology = entry.pathology;
    study.ed = load_phase(entry, base_dir, true);
    study.es = load_phase(entry, base_dir, false);
    study.validate();
    return study;
}

} // namespace mvseg
