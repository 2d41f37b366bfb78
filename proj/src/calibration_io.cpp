#include "softbio/error.hpp"
#include "softbio/geometry.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace softbio {

namespace {

struct Entry {
    std::vector<std::string> values;
    int line = 0;
};

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

class Reader {
public:
    Reader(const std::string& text, std::string source) : source_(std::move(source)) {
        std::istringstream in(text);
        std::string raw;
        int line_no = 0;
        while (std::getline(in, raw)) {
            ++line_no;
            const auto hash = raw.find('#');
            const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                fail(line_no, "expected 'key = value'");
            }
            const std::string key = trim(line.substr(0, eq));
            if (!kKnownKeys.contains(key)) {
                fail(line_no, "unknown key '" + key + "'");
            }
            if (entries_.contains(key)) {
                fail(line_no, "duplicate key '" + key + "'");
            }
            Entry entry;
            entry.line = line_no;
            std::istringstream values(line.substr(eq + 1));
            std::string token;
            while (values >> token) entry.values.push_back(token);
            if (entry.values.empty()) {
                fail(line_no, "missing value for '" + key + "'");
            }
            entries_.emplace(key, std::move(entry));
            last_line_ = line_no;
        }
        last_line_ = line_no;
    }

    [[noreturn]] void fail(int line, const std::string& what) const {
        throw ParseError(what, source_ + ":" + std::to_string(line));
    }

    const Entry& get(const std::string& key) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) {
            fail(last_line_, "missing key '" + key + "'");
        }
        return it->second;
    }

    bool has(const std::string& key) const { return entries_.contains(key); }

    int line_of(const std::string& key) const { return get(key).line; }

    std::string text(const std::string& key) const {
        const Entry& e = get(key);
        if (e.values.size() != 1) fail(e.line, "'" + key + "' takes exactly one value");
        return e.values.front();
    }

    std::vector<double> numbers(const std::string& key, std::size_t count) const {
        const Entry& e = get(key);
        if (e.values.size() != count) {
            fail(e.line, "'" + key + "' expects " + std::to_string(count) + " numbers, got " +
                             std::to_string(e.values.size()));
        }
        std::vector<double> out;
        for (const auto& v : e.values) {
            std::size_t used = 0;
            double d = 0.0;
            try {
                d = std::stod(v, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != v.size() || !std::isfinite(d)) {
                fail(e.line, "'" + key + "': invalid number '" + v + "'");
            }
            out.push_back(d);
        }
        return out;
    }

    double number(const std::string& key) const { return numbers(key, 1).front(); }

    int integer(const std::string& key) const {
        const double d = number(key);
        if (d != std::floor(d) || std::abs(d) > 1e9) fail(line_of(key), "'" + key + "' must be an integer");
        return static_cast<int>(d);
    }

private:
    static inline const std::set<std::string> kKnownKeys = {
        "version", "camera_id", "image_width", "image_height", "focal_x", "focal_y", "principal_x",
        "principal_y", "k1", "k2", "rotation", "translation"};

    std::string source_;
    std::map<std::string, Entry> entries_;
    int last_line_ = 0;
};

}  // namespace

CameraModel parse_calibration(const std::string& text, const std::string& source) {
    Reader reader(text, source);
    if (reader.has("version") && reader.integer("version") != 1) {
        reader.fail(reader.line_of("version"), "unsupported calibration version");
    }
    CameraModel cam;
    cam.id = reader.text("camera_id");
    cam.image_width = reader.integer("image_width");
    cam.image_height = reader.integer("image_height");
    cam.focal_x = reader.number("focal_x");
    cam.focal_y = reader.number("focal_y");
    cam.principal_x = reader.number("principal_x");
    cam.principal_y = reader.number("principal_y");
    cam.k1 = reader.number("k1");
    cam.k2 = reader.has("k2") ? reader.number("k2") : 0.0;
    const auto r = reader.numbers("rotation", 9);
    for (int i = 0; i < 9; ++i) cam.rotation(i / 3, i % 3) = r[i];
    const auto t = reader.numbers("translation", 3);
    cam.translation = Eigen::Vector3d(t[0], t[1], t[2]);

    if (cam.image_width <= 0) reader.fail(reader.line_of("image_width"), "image_width must be positive");
    if (cam.image_height <= 0) reader.fail(reader.line_of("image_height"), "image_height must be positive");
    if (!(cam.focal_x > 0.0)) reader.fail(reader.line_of("focal_x"), "focal_x must be positive");
    if (!(cam.focal_y > 0.0)) reader.fail(reader.line_of("focal_y"), "focal_y must be positive");
    const Eigen::Matrix3d gram = cam.rotation.transpose() * cam.rotation - Eigen::Matrix3d::Identity();
    if (gram.cwiseAbs().maxCoeff() >= 1e-9) reader.fail(reader.line_of("rotation"), "rotation is not orthonormal");
    if (std::abs(cam.rotation.determinant() - 1.0) > 1e-9) {
        reader.fail(reader.line_of("rotation"), "rotation determinant is not +1");
    }
    try {
        cam.validate();
    } catch (const Error& e) {
        reader.fail(reader.line_of("rotation"), e.what());
    }
    return cam;
}

CameraModel load_calibration(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open calibration file", path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_calibration(buffer.str(), path);
}

std::string format_calibration(const CameraModel& camera) {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "# camera calibration\n";
    out << "version = 1\n";
    out << "camera_id = " << camera.id << "\n";
    out << "image_width = " << camera.image_width << "\n";
    out << "image_height = " << camera.image_height << "\n";
    out << "focal_x = " << camera.focal_x << "\n";
    out << "focal_y = " << camera.focal_y << "\n";
    out << "principal_x = " << camera.principal_x << "\n";
    out << "principal_y = " << camera.principal_y << "\n";
    out << "k1 = " << camera.k1 << "\n";
    out << "k2 = " << camera.k2 << "\n";
    out << "rotation =";
    for (int i = 0; i < 9; ++i) out << " " << camera.rotation(i / 3, i % 3);
    out << "\ntranslation = " << camera.translation.x() << " " << camera.translation.y() << " "
        << camera.translation.z() << "\n";
    return out.str();
}

}  // namespace softbio
