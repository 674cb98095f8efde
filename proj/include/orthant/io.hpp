#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "orthant/frechet.hpp"
#include "orthant/logmap.hpp"

namespace orthant {

inline nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(path + ": " + e.what());
    }
    return j;
}

/// Space file: {"ambient_dim": M, "maximal_orthants": [[axis indices], ...]}.
inline OrthantSpace load_space(const std::string& path) {
    const nlohmann::json j = load_json_file(path);
    if (!j.contains("ambient_dim") || !j.contains("maximal_orthants"))
        throw Error(path + ": expected ambient_dim and maximal_orthants");
    std::vector<AxisSet> maximal;
    for (auto& arr : j.at("maximal_orthants")) {
        AxisSet s;
        for (auto& a : arr) {
            const int axis = a.get<int>();
            if (axis < 0 || axis >= AxisSet::max_axes)
                throw AxisOutOfRange("axis index " + std::to_string(axis));
            s.insert(axis);
        }
        maximal.push_back(s);
    }
    return OrthantSpace(j.at("ambient_dim").get<int>(), maximal);
}

inline std::map<int, double> parse_coord_object(const nlohmann::json& obj) {
    std::map<int, double> coords;
    for (auto it = obj.begin(); it != obj.end(); ++it)
        coords[std::stoi(it.key())] = it.value().get<double>();
    return coords;
}

/// Point file: JSON {"coords": {"<axis>": value}} or CSV rows "axis,value".
inline Point load_point(const OrthantSpace& space, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    // Strip leading whitespace to sniff the format.
    size_t pos = content.find_first_not_of(" \t\r\n");
    if (pos != std::string::npos && content[pos] == '{') {
        const nlohmann::json j = nlohmann::json::parse(content);
        return Point(space, parse_coord_object(j.at("coords")));
    }
    std::map<int, double> coords;
    std::istringstream ss(content);
    std::string line;
    while (std::getline(ss, line)) {
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        const size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw Error(path + ": expected 'axis,value' rows");
        coords[std::stoi(line.substr(0, comma))] =
            std::stod(line.substr(comma + 1));
    }
    return Point(space, coords);
}

/// Measure file: {"atoms": [{"coords": {...}, "weight": w}, ...]}.
inline DiscreteMeasure load_measure(const OrthantSpace& space,
                                    const std::string& path) {
    const nlohmann::json j = load_json_file(path);
    std::vector<std::pair<Point, double>> atoms;
    for (auto& a : j.at("atoms"))
        atoms.emplace_back(Point(space, parse_coord_object(a.at("coords"))),
                           a.at("weight").get<double>());
    return DiscreteMeasure(std::move(atoms));
}

/// Direction file: {"coords": {...}} read relative to the support of the
/// base point; axes off the base stratum must be positive.
inline TangentVector load_direction(const OrthantSpace& space,
                                    const Point& base,
                                    const std::string& path) {
    const nlohmann::json j = load_json_file(path);
    return make_tangent(space, base, parse_coord_object(j.at("coords")));
}

/// Deterministic JSON writer: insertion-ordered keys, reals always printed
/// with 17 significant digits so identical runs emit identical bytes.
class JsonWriter {
public:
    static std::string real(double v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }

    JsonWriter& begin_object() {
        sep();
        out_ += '{';
        stack_.push_back(true);
        return *this;
    }
    JsonWriter& end_object() {
        out_ += '}';
        stack_.pop_back();
        fresh_ = false;
        return *this;
    }
    JsonWriter& begin_array() {
        sep();
        out_ += '[';
        stack_.push_back(true);
        return *this;
    }
    JsonWriter& end_array() {
        out_ += ']';
        stack_.pop_back();
        fresh_ = false;
        return *this;
    }
    JsonWriter& key(const std::string& k) {
        sep();
        out_ += '"' + escape(k) + "\":";
        fresh_ = true;
        return *this;
    }
    JsonWriter& value(double v) {
        sep();
        out_ += real(v);
        return *this;
    }
    JsonWriter& value(int v) { return value(static_cast<long long>(v)); }
    JsonWriter& value(long long v) {
        sep();
        out_ += std::to_string(v);
        return *this;
    }
    JsonWriter& value(bool v) {
        sep();
        out_ += v ? "true" : "false";
        return *this;
    }
    JsonWriter& value(const std::string& s) {
        sep();
        out_ += '"' + escape(s) + '"';
        return *this;
    }
    JsonWriter& value(const char* s) { return value(std::string(s)); }

    const std::string& str() const { return out_; }

private:
    void sep() {
        if (!fresh_ && !out_.empty() && out_.back() != '{' && out_.back() != '[')
            out_ += ',';
        fresh_ = false;
    }
    static std::string escape(const std::string& s) {
        std::string o;
        for (char c : s) {
            if (c == '"' || c == '\\') o += '\\';
            o += c;
        }
        return o;
    }
    std::string out_;
    std::vector<bool> stack_;
    bool fresh_ = false;
};

inline void write_axis_array(JsonWriter& w, AxisSet s) {
    w.begin_array();
    s.for_each([&](int a) { w.value(a); });
    w.end_array();
}

inline void write_point_coords(JsonWriter& w, const Point& p) {
    w.begin_object();
    for (auto& [a, v] : p.coords()) {
        w.key(std::to_string(a));
        w.value(v);
    }
    w.end_object();
}

inline void write_vector(JsonWriter& w, const AmbientVector& v) {
    w.begin_array();
    for (int i = 0; i < v.size(); ++i) w.value(v[i]);
    w.end_array();
}

inline void write_matrix(JsonWriter& w, const Matrix& m) {
    w.begin_array();
    for (int r = 0; r < m.rows(); ++r) {
        w.begin_array();
        for (int c = 0; c < m.cols(); ++c) w.value(m(r, c));
        w.end_array();
    }
    w.end_array();
}

}  // namespace orthant
