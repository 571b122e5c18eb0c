#include "gazecap/jsonl.hpp"

#include <json.hpp>

#include <fstream>
#include <set>

namespace gazecap {

using nlohmann::json;

namespace {

template <typename Fn>
void for_each_line(const std::filesystem::path& path, Fn&& fn) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    std::set<std::string> seen;
    std::size_t lineno = 0;
    for (std::string line; std::getline(in, line);) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const json j = json::parse(line);
            const std::string id = j.at("image_id").get<std::string>();
            if (!seen.insert(id).second) throw InputError("duplicate image_id " + id);
            fn(id, j);
        } catch (const json::exception& e) {
            throw InputError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        } catch (const InputError& e) {
            throw InputError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

}  // namespace

std::vector<CaptionSet> read_references(const std::filesystem::path& path) {
    std::vector<CaptionSet> out;
    for_each_line(path, [&](const std::string& id, const json& j) {
        CaptionSet c{id, j.at("captions").get<std::vector<std::string>>()};
        if (c.captions.empty()) throw InputError("image " + id + " has no reference captions");
        out.push_back(std::move(c));
    });
    return out;
}

void write_references(const std::filesystem::path& path, const std::vector<CaptionSet>& refs) {
    auto out = open_out(path);
    for (const auto& r : refs) out << json{{"image_id", r.image_id}, {"captions", r.captions}}.dump() << '\n';
}

std::vector<std::pair<std::string, std::string>> read_candidates(const std::filesystem::path& path) {
    std::vector<std::pair<std::string, std::string>> out;
    for_each_line(path, [&](const std::string& id, const json& j) { out.emplace_back(id, j.at("caption").get<std::string>()); });
    return out;
}

void write_candidates(const std::filesystem::path& path, const std::vector<std::pair<std::string, std::string>>& c) {
    auto out = open_out(path);
    for (const auto& [id, cap] : c) out << json{{"image_id", id}, {"caption", cap}}.dump() << '\n';
}

std::vector<FixationRecord> read_fixations(const std::filesystem::path& path) {
    std::vector<FixationRecord> out;
    for_each_line(path, [&](const std::string& id, const json& j) {
        FixationRecord rec;
        rec.image_id = id;
        for (const auto& f : j.at("fixations")) {
            if (!f.is_array() || (f.size() != 2 && f.size() != 3)) {
                throw InputError("fixation must be [x, y] or [x, y, duration_ms]");
            }
            Fixation fx;
            fx.x = f[0].get<double>();
            fx.y = f[1].get<double>();
            if (f.size() == 3) fx.duration_ms = f[2].get<double>();
            rec.fixations.push_back(fx);
        }
        rec.validate();
        out.push_back(std::move(rec));
    });
    return out;
}

void write_fixations(const std::filesystem::path& path, const std::vector<FixationRecord>& recs) {
    auto out = open_out(path);
    for (const auto& r : recs) {
        json fx = json::array();
        for (const auto& f : r.fixations) {
            if (f.duration_ms) {
                fx.push_back({f.x, f.y, *f.duration_ms});
            } else {
                fx.push_back({f.x, f.y});
            }
        }
        out << json{{"image_id", r.image_id}, {"fixations", fx}}.dump() << '\n';
    }
}

LabelSet read_labels(const std::filesystem::path& path) {
    LabelSet out;
    for_each_line(path, [&](const std::string& id, const json& j) {
        ImageLabels l;
        l.labels = j.at("labels").get<std::vector<int>>();
        if (j.contains("mentioned")) l.mentioned = j.at("mentioned").get<std::vector<int>>();
        if (j.contains("ignored")) l.ignored = j.at("ignored").get<std::vector<int>>();
        out.emplace(id, std::move(l));
    });
    return out;
}

void write_labels(const std::filesystem::path& path, const std::vector<std::pair<std::string, ImageLabels>>& labels) {
    auto out = open_out(path);
    for (const auto& [id, l] : labels) {
        out << json{{"image_id", id}, {"labels", l.labels}, {"mentioned", l.mentioned}, {"ignored", l.ignored}}.dump()
            << '\n';
    }
}

std::vector<std::string> read_id_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    std::vector<std::string> ids;
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) ids.push_back(line);
    }
    return ids;
}

void write_id_list(const std::filesystem::path& path, const std::vector<std::string>& ids) {
    auto out = open_out(path);
    for (const auto& id : ids) out << id << '\n';
}

}  // namespace gazecap
