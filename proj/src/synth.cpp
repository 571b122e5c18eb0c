#include "gazecap/synth.hpp"

#include "gazecap/jsonl.hpp"
#include "gazecap/optim.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

namespace gazecap {

const SynthPalette& synth_palette() {
    static const SynthPalette p{
        {"red", "green", "blue", "yellow"},
        {Color{220, 30, 30}, Color{30, 200, 40}, Color{40, 60, 230}, Color{235, 220, 40}},
    };
    return p;
}

std::string to_string(ShapeType t) {
    switch (t) {
        case ShapeType::circle: return "circle";
        case ShapeType::square: return "square";
        case ShapeType::triangle: return "triangle";
    }
    return "?";
}

int synth_category(const SceneShape& s) { return s.color * 3 + static_cast<int>(s.type); }
int synth_category_count() { return static_cast<int>(synth_palette().colors.size()) * 3; }

namespace {

bool inside(const SceneShape& s, int y, int x) {
    const Region& b = s.box;
    if (!b.contains(y, x)) return false;
    const Real cy = b.y0 + (b.height - 1) / 2.0;
    const Real cx = b.x0 + (b.width - 1) / 2.0;
    switch (s.type) {
        case ShapeType::square: return true;
        case ShapeType::circle: {
            const Real r = b.width / 2.0;
            return (y - cy) * (y - cy) + (x - cx) * (x - cx) <= r * r;
        }
        case ShapeType::triangle: {
            const Real frac = (y - b.y0 + 1.0) / b.height;  // apex at the top
            return std::abs(x - cx) <= frac * b.width / 2.0;
        }
    }
    return false;
}

std::string describe(const SceneShape& s) {
    return "a " + synth_palette().names[static_cast<std::size_t>(s.color)] + " " + to_string(s.type);
}

}  // namespace

RowVector SceneShapeClassifier::scores(const RgbImage& img) const {
    const auto& pal = synth_palette().colors;
    RowVector out = RowVector::Zero(synth_category_count());
    std::vector<int> color(static_cast<std::size_t>(img.height) * img.width, -1);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (std::size_t c = 0; c < pal.size(); ++c) {
                if (img.at(y, x, 0) == pal[c][0] && img.at(y, x, 1) == pal[c][1] && img.at(y, x, 2) == pal[c][2]) {
                    color[static_cast<std::size_t>(y) * img.width + x] = static_cast<int>(c);
                }
            }
        }
    }
    std::vector<char> seen(color.size(), 0);
    std::vector<int> stack;
    for (std::size_t start = 0; start < color.size(); ++start) {
        if (color[start] < 0 || seen[start]) continue;
        const int c = color[start];
        int y0 = img.height, y1 = -1, x0 = img.width, x1 = -1, n = 0;
        stack.assign(1, static_cast<int>(start));
        seen[start] = 1;
        while (!stack.empty()) {
            const int p = stack.back();
            stack.pop_back();
            const int y = p / img.width;
            const int x = p % img.width;
            ++n;
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            const int nb[4][2] = {{y - 1, x}, {y + 1, x}, {y, x - 1}, {y, x + 1}};
            for (const auto& q : nb) {
                if (q[0] < 0 || q[0] >= img.height || q[1] < 0 || q[1] >= img.width) continue;
                const auto k = static_cast<std::size_t>(q[0]) * img.width + q[1];
                if (!seen[k] && color[k] == c) {
                    seen[k] = 1;
                    stack.push_back(static_cast<int>(k));
                }
            }
        }
        if (n < 4) continue;
        const Real fill = static_cast<Real>(n) / ((y1 - y0 + 1) * (x1 - x0 + 1));
        const ShapeType type = fill >= 0.9 ? ShapeType::square : (fill >= 0.65 ? ShapeType::circle : ShapeType::triangle);
        out(c * 3 + static_cast<int>(type)) += static_cast<Real>(n) / (img.height * img.width);
    }
    return out;
}

SyntheticScene generate_scene(int index, const SynthOptions& opt) {
    if (opt.grid < 2 || opt.image_size < opt.grid * 4) throw InputError("synth: image too small for the grid");
    if (opt.difficulty < 0 || opt.difficulty + 2 > opt.grid * opt.grid) throw InputError("synth: too many shapes");
    if (!(opt.p_fix >= 0.0 && opt.p_fix <= 1.0) || !(opt.p_unattended >= 0.0 && opt.p_unattended <= 1.0)) {
        throw InputError("synth: probabilities must lie in [0,1]");
    }
    if (!(opt.distractor_scale > 0.0 && opt.distractor_scale <= 1.0)) throw InputError("synth: distractor_scale must lie in (0,1]");
    std::mt19937_64 rng(opt.seed ^ fnv1a("scene:" + std::to_string(index)));
    std::uniform_real_distribution<Real> unit(0.0, 1.0);
    auto randint = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

    SyntheticScene sc;
    char id[32];
    std::snprintf(id, sizeof id, "img%05d", index);
    sc.image_id = id;

    const int size = opt.image_size;
    const int cell = size / opt.grid;
    sc.image = RgbImage(size, size);
    const int base = randint(70, 110);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const auto v = static_cast<std::uint8_t>(base + randint(-10, 10));
            sc.image.set(y, x, v, v, v);
        }
    }

    // Distinct cells and distinct (type, color) combinations.
    std::vector<int> cells(static_cast<std::size_t>(opt.grid * opt.grid));
    for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = static_cast<int>(i);
    std::shuffle(cells.begin(), cells.end(), rng);
    std::vector<int> combos(static_cast<std::size_t>(synth_category_count()));
    for (std::size_t i = 0; i < combos.size(); ++i) combos[i] = static_cast<int>(i);
    std::shuffle(combos.begin(), combos.end(), rng);

    const int n_shapes = 2 + opt.difficulty;
    const int extent = std::max(4, cell * 3 / 4);
    for (int k = 0; k < n_shapes; ++k) {
        SceneShape s;
        s.color = combos[static_cast<std::size_t>(k)] / 3;
        s.type = static_cast<ShapeType>(combos[static_cast<std::size_t>(k)] % 3);
        s.cell_y = cells[static_cast<std::size_t>(k)] / opt.grid;
        s.cell_x = cells[static_cast<std::size_t>(k)] % opt.grid;
        s.mentioned = k < 2;
        const int smallest = std::max(3, static_cast<int>(std::lround(extent * opt.distractor_scale)));
        const int side = s.mentioned ? extent : randint(smallest, extent);
        const int slack = cell - side;
        const int jitter = slack / 4;
        s.box = {s.cell_y * cell + slack / 2 + randint(-jitter, jitter),
                 s.cell_x * cell + slack / 2 + randint(-jitter, jitter), side, side};
        sc.shapes.push_back(s);
    }
    for (const auto& s : sc.shapes) {
        const Color& c = synth_palette().colors[static_cast<std::size_t>(s.color)];
        for (int y = s.box.y0; y < s.box.y0 + s.box.height; ++y) {
            for (int x = s.box.x0; x < s.box.x0 + s.box.width; ++x) {
                if (inside(s, y, x)) sc.image.set(y, x, c[0], c[1], c[2]);
            }
        }
    }

    // Caption templates over the two mentioned shapes, first = upper (or left).
    SceneShape first = sc.shapes[0];
    SceneShape second = sc.shapes[1];
    if (std::tie(second.cell_y, second.cell_x) < std::tie(first.cell_y, first.cell_x)) std::swap(first, second);
    const bool vertical = first.cell_y < second.cell_y;
    sc.captions = {
        describe(first) + (vertical ? " above " : " left of ") + describe(second),
        describe(second) + (vertical ? " below " : " right of ") + describe(first),
        "there is " + describe(first) + " and " + describe(second),
    };

    sc.fixations.image_id = sc.image_id;
    // -1: both mentioned shapes are targets; otherwise only that one is.
    const int only_target = unit(rng) < opt.p_unattended ? randint(0, 1) : -1;
    for (int f = 0; f < opt.fixations; ++f) {
        Fixation fx;
        if (unit(rng) < opt.p_fix) {
            const int target = only_target >= 0 ? only_target : randint(0, 1);
            const Region& b = sc.shapes[static_cast<std::size_t>(target)].box;
            fx.x = (b.x0 + unit(rng) * b.width) / size;
            fx.y = (b.y0 + unit(rng) * b.height) / size;
        } else {
            fx.x = unit(rng);
            fx.y = unit(rng);
        }
        if (opt.durations) fx.duration_ms = static_cast<Real>(randint(150, 450));
        sc.fixations.fixations.push_back(fx);
    }

    for (const auto& s : sc.shapes) {
        sc.labels.labels.push_back(synth_category(s));
        (s.mentioned ? sc.labels.mentioned : sc.labels.ignored).push_back(synth_category(s));
    }
    return sc;
}

std::vector<SyntheticScene> generate_scenes(const SynthOptions& options) {
    if (options.n_images < 1) throw InputError("synth: need at least one image");
    std::vector<SyntheticScene> out;
    out.reserve(static_cast<std::size_t>(options.n_images));
    for (int i = 0; i < options.n_images; ++i) out.push_back(generate_scene(i, options));
    return out;
}

SplitIds split_ids(const std::vector<SyntheticScene>& scenes, const SynthOptions& options) {
    const int n = static_cast<int>(scenes.size());
    const int n_train = options.n_train >= 0 ? std::min(n, options.n_train) : std::max(1, n * 7 / 10);
    const int n_val = options.n_val >= 0 ? std::min(n - n_train, options.n_val) : (n - n_train) / 2;
    SplitIds s;
    for (int i = 0; i < n; ++i) {
        auto& dst = i < n_train ? s.train : (i < n_train + n_val ? s.val : s.test);
        dst.push_back(scenes[static_cast<std::size_t>(i)].image_id);
    }
    return s;
}

void write_dataset(const std::filesystem::path& dir, const std::vector<SyntheticScene>& scenes,
                   const SynthOptions& options, const std::string& config_echo) {
    std::error_code ec;
    std::filesystem::create_directories(dir / "images", ec);
    if (ec) throw std::runtime_error("cannot create " + (dir / "images").string() + ": " + ec.message());

    std::vector<CaptionSet> refs;
    std::vector<FixationRecord> fix;
    std::vector<std::pair<std::string, ImageLabels>> labels;
    std::ofstream shapes(dir / "shapes.jsonl");
    if (!shapes) throw std::runtime_error("cannot write " + (dir / "shapes.jsonl").string());
    for (const auto& sc : scenes) {
        write_ppm(dir / "images" / (sc.image_id + ".ppm"), sc.image);
        refs.push_back({sc.image_id, sc.captions});
        fix.push_back(sc.fixations);
        labels.emplace_back(sc.image_id, sc.labels);
        nlohmann::json js = nlohmann::json::array();
        for (const auto& s : sc.shapes) {
            js.push_back({{"type", to_string(s.type)},
                          {"color", synth_palette().names[static_cast<std::size_t>(s.color)]},
                          {"category", synth_category(s)},
                          {"box", {s.box.y0, s.box.x0, s.box.height, s.box.width}},
                          {"mentioned", s.mentioned}});
        }
        shapes << nlohmann::json{{"image_id", sc.image_id}, {"shapes", js}}.dump() << '\n';
    }
    write_references(dir / "captions.jsonl", refs);
    write_fixations(dir / "fixations.jsonl", fix);
    write_labels(dir / "labels.jsonl", labels);
    const SplitIds s = split_ids(scenes, options);
    write_id_list(dir / "train.txt", s.train);
    write_id_list(dir / "val.txt", s.val);
    write_id_list(dir / "test.txt", s.test);
    std::ofstream cfg(dir / "config.txt");
    cfg << config_echo;
}

}  // namespace gazecap
