#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include "vbsynth/digest.hpp"
#include "vbsynth/io.hpp"
#include "vbsynth/masking.hpp"

namespace vbsynth::testing {

namespace {

constexpr double kPi = std::numbers::pi;

void add_arc(std::vector<Point>& pts, double x0, double x1, double y, double lift, int count)
{
    for (int i = 0; i < count; ++i) {
        const double u = static_cast<double>(i) / (count - 1);
        pts.push_back({x0 + (x1 - x0) * u, y - lift * std::sin(kPi * u)});
    }
}

void add_eye(std::vector<Point>& pts, double cx, double cy, double w, double h)
{
    pts.push_back({cx - w / 2, cy});
    pts.push_back({cx - w / 6, cy - h / 2});
    pts.push_back({cx + w / 6, cy - h / 2});
    pts.push_back({cx + w / 2, cy});
    pts.push_back({cx + w / 6, cy + h / 2});
    pts.push_back({cx - w / 6, cy + h / 2});
}

void add_ring(std::vector<Point>& pts, double cx, double cy, double rx, double ry, int count)
{
    // Starts at the left corner and runs clockwise over the top lip.
    for (int i = 0; i < count; ++i) {
        const double a = kPi + 2.0 * kPi * i / count;
        pts.push_back({cx + rx * std::cos(a), cy + ry * std::sin(a)});
    }
}

double polyline_distance(Point p, std::span<const Point> line)
{
    double best = 1e300;
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
        const Point a = line[i];
        const Point ab = line[i + 1] - a;
        const Point ap = p - a;
        double t = (ap.x * ab.x + ap.y * ab.y) / (ab.x * ab.x + ab.y * ab.y);
        t = std::clamp(t, 0.0, 1.0);
        best = std::min(best, norm(p - (a + t * ab)));
    }
    return best;
}

std::uint32_t hash3(int x, int y, int t)
{
    std::uint32_t h = static_cast<std::uint32_t>(x) * 73856093u ^ static_cast<std::uint32_t>(y) * 19349663u ^
                      static_cast<std::uint32_t>(t) * 83492791u;
    h ^= h >> 13;
    h *= 0x5bd1e995u;
    return h ^ (h >> 15);
}

std::uint8_t to_byte(double v)
{
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0l, 255l));
}

void add_box(std::vector<Point>& pts, Box b, std::size_t count)
{
    const Point corners[4] = {{b.x0, b.y0}, {b.x1, b.y0}, {b.x1, b.y1}, {b.x0, b.y1}};
    for (const Point& c : corners) {
        pts.push_back(c);
    }
    // Remaining points go to edge midpoints, cycling round the box.
    for (std::size_t i = 4; i < count; ++i) {
        const std::size_t e = i % 4;
        const Point a = corners[e], c = corners[(e + 1) % 4];
        const double u = static_cast<double>(i / 4) / static_cast<double>(count / 4 + 1);
        pts.push_back({a.x + u * (c.x - a.x), a.y + u * (c.y - a.y)});
    }
}

} // namespace

LandmarkSet box_landmarks(const std::array<Box, 4>& regions, Box outline)
{
    std::vector<Point> pts;
    add_box(pts, outline, 17);
    std::array<Point, 68> ordered{};
    for (std::size_t i = 0; i < 17; ++i) {
        ordered[i] = pts[i];
    }
    for (std::size_t k = 0; k < kRegions.size(); ++k) {
        const IndexRange range = LandmarkSet::region_range(kRegions[k]);
        std::vector<Point> region;
        add_box(region, regions[k], range.size());
        for (std::size_t i = 0; i < range.size(); ++i) {
            ordered[range.first + i] = region[i];
        }
    }
    return LandmarkSet(std::vector<Point>(ordered.begin(), ordered.end()));
}

LandmarkSet template_landmarks(double x0, double y0, double size)
{
    std::vector<Point> n; // normalized
    for (int k = 0; k <= 16; ++k) {
        const double a = kPi - k * kPi / 16.0;
        n.push_back({0.5 + 0.42 * std::cos(a), 0.38 + 0.58 * std::sin(a)});
    }
    add_arc(n, 0.16, 0.42, 0.30, 0.05, 5);
    add_arc(n, 0.58, 0.84, 0.30, 0.05, 5);
    for (int i = 0; i < 4; ++i) {
        n.push_back({0.5, 0.38 + 0.06 * i});
    }
    n.push_back({0.42, 0.62});
    n.push_back({0.46, 0.635});
    n.push_back({0.5, 0.645});
    n.push_back({0.54, 0.635});
    n.push_back({0.58, 0.62});
    add_eye(n, 0.32, 0.41, 0.14, 0.06);
    add_eye(n, 0.68, 0.41, 0.14, 0.06);
    add_ring(n, 0.5, 0.79, 0.15, 0.065, 12);
    add_ring(n, 0.5, 0.79, 0.10, 0.025, 8);

    std::vector<Point> pts;
    pts.reserve(n.size());
    for (const Point& p : n) {
        pts.push_back({x0 + size * p.x, y0 + size * p.y});
    }
    return LandmarkSet(std::move(pts));
}

Frame render_face(int width, int height, const LandmarkSet& lm, int frame_index)
{
    const ConvexHull face(lm.points());
    const ConvexHull left_eye(lm.points().subspan(36, 6));
    const ConvexHull right_eye(lm.points().subspan(42, 6));
    const ConvexHull mouth(lm.region(Region::Mouth));
    const ConvexHull inner_mouth(lm.points().subspan(60, 8));
    const auto brow_l = lm.points().subspan(17, 5);
    const auto brow_r = lm.points().subspan(22, 5);
    const auto nose = lm.region(Region::Nose);

    Frame f = make_frame(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const Point p{x + 0.5, y + 0.5};
            const double noise = static_cast<double>(hash3(x, y, frame_index) & 15u) - 7.5;
            double r = 40 + 0.5 * x, g = 60 + 0.3 * y, b = 90 + 0.2 * (x + y);
            if (face.signed_distance(p) < 6.0) {
                const double tex = 12.0 * std::sin(0.45 * x + 0.3 * y) * std::cos(0.2 * y - 0.1 * x);
                r = 205 + tex;
                g = 160 + tex;
                b = 135 + 0.5 * tex;
            }
            if (std::min(polyline_distance(p, brow_l), polyline_distance(p, brow_r)) < 1.6) {
                r = 75, g = 55, b = 45;
            }
            if (polyline_distance(p, nose.subspan(0, 4)) < 1.0 || polyline_distance(p, nose.subspan(4, 5)) < 1.0) {
                r -= 50, g -= 50, b -= 40;
            }
            for (const ConvexHull* eye : {&left_eye, &right_eye}) {
                const double d = eye->signed_distance(p);
                if (d < 0.0) {
                    r = 235, g = 235, b = 230;
                    const Point c = centroid(eye->vertices());
                    if (norm(p - c) < 2.8) {
                        r = 50, g = 35, b = 25;
                    }
                } else if (d < 0.8) {
                    r = 40, g = 30, b = 30;
                }
            }
            if (inner_mouth.signed_distance(p) < 0.0) {
                r = 90, g = 20, b = 25;
            } else if (mouth.signed_distance(p) < 0.0) {
                r = 180, g = 70, b = 75;
            }
            f.at(x, y, 0) = to_byte(r + noise);
            f.at(x, y, 1) = to_byte(g + noise);
            f.at(x, y, 2) = to_byte(b + 0.5 * noise);
        }
    }
    return f;
}

Clip make_face_clip(std::size_t n, int dim)
{
    Clip clip;
    const double size = 0.72 * dim;
    const double base = (dim - size) / 2.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = 1.5 * std::sin(0.9 * i);
        const double dy = 1.0 * std::cos(0.7 * i);
        const LandmarkSet lm = template_landmarks(base + dx, base - 0.04 * dim + dy, size);
        clip.frames.push_back(render_face(dim, dim, lm, static_cast<int>(i)));
        clip.landmarks.push_back(lm);
        clip.source_indices.push_back(i);
    }
    return clip;
}

std::filesystem::path scratch_dir(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("vbsynth_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string frame_hash(const Frame& f)
{
    return sha256_hex(f.data());
}

void write_clip(const Clip& clip, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir / "frames");
    for (std::size_t i = 0; i < clip.size(); ++i) {
        write_png(dir / "frames" / frame_filename(i), clip.frames[i]);
    }
    write_landmarks(dir / "landmarks.json", clip.landmarks);
}

namespace {

std::string shell_quote(const std::string& s)
{
    std::string out = "'";
    for (char c : s) {
        out += c == '\'' ? std::string("'\\''") : std::string(1, c);
    }
    return out + "'";
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

CommandResult run_command(const std::string& binary, const std::vector<std::string>& args)
{
    static int counter = 0;
    const auto base = std::filesystem::temp_directory_path() /
                      ("vbsynth_cmd_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::string cmd = shell_quote(binary);
    for (const std::string& a : args) {
        cmd += " " + shell_quote(a);
    }
    cmd += " >" + shell_quote(base.string() + ".out") + " 2>" + shell_quote(base.string() + ".err");
    const int status = std::system(cmd.c_str());
    CommandResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(base.string() + ".out");
    r.err = slurp(base.string() + ".err");
    std::filesystem::remove(base.string() + ".out");
    std::filesystem::remove(base.string() + ".err");
    return r;
}

} // namespace vbsynth::testing
