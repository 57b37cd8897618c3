#pragma once

// Dataset CSV and model/report serialization.
//
// Dataset format: UTF-8, LF line endings, header
//   sample_id,domain,class,strength,identity,x0,y0,...,x{L-1},y{L-1}
// Coordinates are written with 17 significant digits so a load(save(x))
// round trip reproduces every double bit-exactly.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mdnre/common.hpp"
#include "mdnre/synthgen.hpp"
#include "mdnre/training.hpp"

namespace mdnre {

using json = nlohmann::ordered_json;

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& tok, std::size_t line_no) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(tok, &pos);
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": bad number '" + tok + "'");
    }
    if (pos != tok.size())
        throw ParseError("line " + std::to_string(line_no) + ": bad number '" + tok + "'");
    if (!std::isfinite(v))
        throw ParseError("line " + std::to_string(line_no) + ": non-finite value");
    return v;
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string tok;
    std::stringstream ss(line);
    while (std::getline(ss, tok, ',')) out.push_back(tok);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

// Write-temp-then-rename so readers never observe a partial file.
inline void write_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw ConfigError("cannot open '" + tmp + "' for writing");
        f << content;
    }
    std::filesystem::rename(tmp, path);
}

inline void push_unique(std::vector<std::string>& v, const std::string& s) {
    for (const auto& e : v)
        if (e == s) return;
    v.push_back(s);
}

}  // namespace detail

inline std::string dataset_to_csv(const Dataset& data) {
    if (data.set.samples.empty()) throw ConfigError("refusing to write an empty dataset");
    const std::size_t L = data.set.samples.front().landmarks.size();
    std::string out = "sample_id,domain,class,strength,identity";
    for (std::size_t l = 0; l < L; ++l)
        out += ",x" + std::to_string(l) + ",y" + std::to_string(l);
    out += "\n";
    for (std::size_t i = 0; i < data.set.samples.size(); ++i) {
        const Sample& s = data.set.samples[i];
        out += std::to_string(i) + "," + s.domain + "," + s.cls + "," +
               detail::format_double(s.strength) + "," + s.identity;
        for (const auto& p : s.landmarks)
            out += "," + detail::format_double(p.x) + "," + detail::format_double(p.y);
        out += "\n";
    }
    return out;
}

inline void save_dataset(const Dataset& data, const std::string& path) {
    detail::write_atomic(path, dataset_to_csv(data));
}

inline Dataset dataset_from_csv(std::istream& in, const std::string& neutral_label = "neutral") {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("line 1: empty dataset");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = detail::split_csv(line);
    if (header.size() < 7 || header[0] != "sample_id" || header[1] != "domain" ||
        header[2] != "class" || header[3] != "strength" || header[4] != "identity")
        throw ParseError("line 1: unrecognized header");
    if ((header.size() - 5) % 2 != 0) throw ParseError("line 1: odd coordinate column count");
    const std::size_t L = (header.size() - 5) / 2;
    for (std::size_t l = 0; l < L; ++l) {
        if (header[5 + 2 * l] != "x" + std::to_string(l) ||
            header[6 + 2 * l] != "y" + std::to_string(l))
            throw ParseError("line 1: coordinate columns must be x0,y0,...");
    }

    Dataset data;
    data.set.neutral_label = neutral_label;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tok = detail::split_csv(line);
        if (tok.size() != header.size())
            throw ParseError("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(tok.size()));
        Sample s;
        s.domain = tok[1];
        s.cls = tok[2];
        s.strength = detail::parse_double(tok[3], line_no);
        s.identity = tok[4];
        s.landmarks.resize(L);
        for (std::size_t l = 0; l < L; ++l)
            s.landmarks[l] = {detail::parse_double(tok[5 + 2 * l], line_no),
                              detail::parse_double(tok[6 + 2 * l], line_no)};
        detail::push_unique(data.set.domain_labels, s.domain);
        detail::push_unique(data.set.class_labels, s.cls);
        data.truth.push_back({s.domain, s.cls, s.strength, s.identity});
        data.set.samples.push_back(std::move(s));
    }
    if (data.set.samples.empty()) throw ParseError("line 1: dataset has a header but no rows");
    return data;
}

inline Dataset load_dataset(const std::string& path, const std::string& neutral_label = "neutral") {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open dataset '" + path + "'");
    return dataset_from_csv(f, neutral_label);
}

// ---- Model serialization ---------------------------------------------

inline json landmarks_to_json(const LandmarkVector& lm) {
    json arr = json::array();
    for (const auto& p : lm) arr.push_back(json::array({p.x, p.y}));
    return arr;
}

inline LandmarkVector landmarks_from_json(const json& arr) {
    LandmarkVector lm;
    for (const auto& p : arr) lm.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    return lm;
}

inline json model_to_json(const FittedModel& model) {
    json j;
    j["neutral_threshold"] = model.neutral_threshold;
    j["frames"] = json::array();
    for (const auto& f : model.frames) {
        json jf;
        jf["domain"] = f.domain;
        jf["anchor_indices"] = f.anchor_indices;
        jf["landmarks"] = landmarks_to_json(f.landmarks);
        j["frames"].push_back(jf);
    }
    json bank;
    bank["class_labels"] = model.bank.class_labels;
    bank["neutral_index"] = model.bank.neutral_index;
    bank["calib"] = model.bank.calib;
    bank["directions"] = json::array();
    for (const auto& row : model.bank.directions) {
        json jr = json::array();
        for (const auto& n : row) jr.push_back(json::array({n.x, n.y}));
        bank["directions"].push_back(jr);
    }
    j["bank"] = bank;
    return j;
}

inline FittedModel model_from_json(const json& j) {
    FittedModel model;
    model.neutral_threshold = j.at("neutral_threshold").get<double>();
    for (const auto& jf : j.at("frames")) {
        ReferenceFrame f;
        f.domain = jf.at("domain").get<std::string>();
        f.anchor_indices = jf.at("anchor_indices").get<std::vector<std::size_t>>();
        f.landmarks = landmarks_from_json(jf.at("landmarks"));
        model.frames.push_back(std::move(f));
    }
    const json& bank = j.at("bank");
    model.bank.class_labels = bank.at("class_labels").get<std::vector<std::string>>();
    model.bank.neutral_index = bank.at("neutral_index").get<std::size_t>();
    model.bank.calib = bank.at("calib").get<std::vector<double>>();
    for (const auto& jr : bank.at("directions")) {
        std::vector<Vec2> row;
        for (const auto& n : jr) row.push_back({n.at(0).get<double>(), n.at(1).get<double>()});
        model.bank.directions.push_back(std::move(row));
    }
    return model;
}

inline void save_model(const FittedModel& model, const std::string& path) {
    detail::write_atomic(path, model_to_json(model).dump(2) + "\n");
}

inline FittedModel load_model(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open model '" + path + "'");
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw ParseError(std::string("model file: ") + e.what());
    }
    return model_from_json(j);
}

}  // namespace mdnre
