#include "abductor/bench/grid.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <stdexcept>

#include "abductor/meta/learner.hpp"
#include "abductor/meta/metarule.hpp"
#include "abductor/meta/task.hpp"

namespace abductor::bench {

using json = nlohmann::json;

Grid Grid::make(std::size_t rows, std::size_t cols, std::vector<int> cells) {
    if (cells.size() != rows * cols) {
        throw std::invalid_argument("grid has " + std::to_string(cells.size()) + " cells, expected " +
                                    std::to_string(rows * cols));
    }
    for (const int c : cells) {
        if (c < 0 || c > 9) {
            throw std::invalid_argument("grid colour " + std::to_string(c) + " outside 0..9");
        }
    }
    Grid g;
    g.rows_ = rows;
    g.cols_ = cols;
    g.cells_ = std::move(cells);
    return g;
}

Grid Grid::from_json(const json& j) {
    if (!j.is_array()) {
        throw std::invalid_argument("grid must be an array of rows");
    }
    std::vector<int> cells;
    std::size_t cols = 0;
    for (std::size_t r = 0; r < j.size(); ++r) {
        const auto& row = j[r];
        if (!row.is_array()) {
            throw std::invalid_argument("grid row must be an array");
        }
        if (r == 0) {
            cols = row.size();
        } else if (row.size() != cols) {
            throw std::invalid_argument("ragged grid");
        }
        for (const auto& c : row) {
            if (!c.is_number_integer()) {
                throw std::invalid_argument("grid cells must be integers");
            }
            cells.push_back(c.get<int>());
        }
    }
    return make(j.size(), cols, std::move(cells));
}

json Grid::to_json() const {
    json out = json::array();
    for (std::size_t r = 0; r < rows_; ++r) {
        out.push_back(std::vector<int>(cells_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
                                       cells_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_)));
    }
    return out;
}

std::size_t hamming(const Grid& a, const Grid& b) {
    const std::size_t rows = std::max(a.rows(), b.rows());
    const std::size_t cols = std::max(a.cols(), b.cols());
    std::size_t d = 0;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const bool in_a = r < a.rows() && c < a.cols();
            const bool in_b = r < b.rows() && c < b.cols();
            if (in_a != in_b || (in_a && a.at(r, c) != b.at(r, c))) {
                ++d;
            }
        }
    }
    return d;
}

namespace {

std::vector<GridPair> pairs_from(const json& arr) {
    std::vector<GridPair> out;
    for (const auto& p : arr) {
        out.push_back({Grid::from_json(p.at("input")), Grid::from_json(p.at("output"))});
    }
    return out;
}

} // namespace

ArcTask parse_arc_task(const json& j, std::string id) {
    ArcTask t;
    t.id = std::move(id);
    try {
        t.train = pairs_from(j.at("train"));
        t.test = pairs_from(j.at("test"));
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("bad ARC task: ") + e.what());
    }
    return t;
}

ArcTask load_arc_task(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot read " + path);
    }
    try {
        auto stem = path.substr(path.find_last_of('/') + 1);
        stem = stem.substr(0, stem.find('.'));
        return parse_arc_task(json::parse(in), stem);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

const std::vector<std::string>& grid1d_transforms() {
    static const std::vector<std::string> all = [] {
        std::vector<std::string> out = {"identity", "mirror", "fill_between", "gravity_left", "gravity_right"};
        for (int k = 1; k <= 3; ++k) {
            out.push_back("shift_left_" + std::to_string(k));
            out.push_back("shift_right_" + std::to_string(k));
        }
        for (int a = 1; a <= 9; ++a) {
            for (int b = 1; b <= 9; ++b) {
                if (a != b) {
                    out.push_back("recolor_" + std::to_string(a) + "_" + std::to_string(b));
                }
            }
        }
        return out;
    }();
    return all;
}

std::optional<Grid> apply_transform(const std::string& name, const Grid& g) {
    if (g.rows() != 1) {
        return std::nullopt;
    }
    std::vector<int> v = g.cells();
    const auto n = v.size();
    const bool any = std::any_of(v.begin(), v.end(), [](int c) { return c != 0; });
    if (name == "identity") {
        return g;
    }
    if (name == "mirror") {
        std::reverse(v.begin(), v.end());
        return Grid::row(v);
    }
    if (name == "gravity_left" || name == "gravity_right") {
        if (!any) {
            return std::nullopt;
        }
        std::vector<int> nz;
        for (int c : v) {
            if (c != 0) {
                nz.push_back(c);
            }
        }
        std::vector<int> out(n, 0);
        const std::size_t off = name == "gravity_left" ? 0 : n - nz.size();
        std::copy(nz.begin(), nz.end(), out.begin() + static_cast<std::ptrdiff_t>(off));
        return Grid::row(out);
    }
    if (name == "fill_between") {
        const auto first = std::find_if(v.begin(), v.end(), [](int c) { return c != 0; });
        const auto last = std::find_if(v.rbegin(), v.rend(), [](int c) { return c != 0; });
        if (first == v.end()) {
            return std::nullopt;
        }
        const auto lo = static_cast<std::size_t>(first - v.begin());
        const auto hi = n - 1 - static_cast<std::size_t>(last - v.rbegin());
        if (hi <= lo + 1 || v[lo] != v[hi]) {
            return std::nullopt;
        }
        std::fill(v.begin() + static_cast<std::ptrdiff_t>(lo), v.begin() + static_cast<std::ptrdiff_t>(hi + 1), v[lo]);
        return Grid::row(v);
    }
    if (name.rfind("shift_", 0) == 0) {
        const bool left = name.rfind("shift_left_", 0) == 0;
        const auto k = static_cast<std::size_t>(std::stoi(name.substr(name.find_last_of('_') + 1)));
        if (!any || k >= n) {
            return std::nullopt;
        }
        std::vector<int> out(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            if (v[i] == 0) {
                continue;
            }
            if (left ? i < k : i + k >= n) {
                return std::nullopt;
            }
            out[left ? i - k : i + k] = v[i];
        }
        return Grid::row(out);
    }
    if (name.rfind("recolor_", 0) == 0) {
        const int a = name[8] - '0';
        const int b = name[10] - '0';
        if (std::find(v.begin(), v.end(), a) == v.end()) {
            return std::nullopt;
        }
        std::replace(v.begin(), v.end(), a, b);
        return Grid::row(v);
    }
    return std::nullopt;
}

ArcTask gen_grid1d_task(std::uint64_t seed, std::size_t n_train, std::size_t width) {
    if (width < 8) {
        throw std::invalid_argument("grid-1d tasks need width >= 8");
    }
    std::mt19937_64 rng(seed);
    auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    static const std::vector<std::string> families = {"mirror",        "fill_between", "gravity_left",
                                                      "gravity_right", "shift",        "recolor"};
    const auto family = families[static_cast<std::size_t>(uni(0, static_cast<int>(families.size()) - 1))];
    std::string name = family;
    int recolor_from = 0;
    if (family == "shift") {
        name = std::string(uni(0, 1) == 0 ? "shift_left_" : "shift_right_") + std::to_string(uni(1, 3));
    } else if (family == "recolor") {
        recolor_from = uni(1, 9);
        int to = uni(1, 8);
        to += to >= recolor_from ? 1 : 0;
        name = "recolor_" + std::to_string(recolor_from) + "_" + std::to_string(to);
    }
    const int w = static_cast<int>(width);
    auto make_input = [&]() -> Grid {
        for (;;) {
            std::vector<int> v(width, 0);
            const int colour = recolor_from != 0 ? recolor_from : uni(1, 9);
            if (family == "fill_between") {
                const int lo = uni(0, w - 4);
                const int hi = uni(lo + 2, w - 1);
                v[static_cast<std::size_t>(lo)] = colour;
                v[static_cast<std::size_t>(hi)] = colour;
            } else {
                const int len = uni(2, 4);
                const int start = uni(0, w - len);
                for (int i = 0; i < len; ++i) {
                    v[static_cast<std::size_t>(start + i)] = colour;
                }
                if (family == "mirror" || family == "gravity_left" || family == "gravity_right") {
                    v[static_cast<std::size_t>(start)] = colour == 9 ? 1 : colour + 1;
                }
            }
            const auto g = Grid::row(v);
            const auto out = apply_transform(name, g);
            if (out && !(*out == g)) {
                return g;
            }
        }
    };
    ArcTask t;
    t.id = "g" + std::to_string(seed % 1000000);
    for (std::size_t i = 0; i < n_train + 1; ++i) {
        const auto in = make_input();
        GridPair p{in, *apply_transform(name, in)};
        (i < n_train ? t.train : t.test).push_back(std::move(p));
    }
    return t;
}

GridSolution solve_grid_task(const ArcTask& t) {
    GridSolution sol;
    logic::Program bg;
    std::vector<logic::Atom> pos;
    for (std::size_t i = 0; i < t.train.size(); ++i) {
        const auto id = logic::Term::constant("pair" + std::to_string(i + 1));
        pos.push_back(logic::Atom{"target", {id}});
        for (const auto& name : grid1d_transforms()) {
            const auto out = apply_transform(name, t.train[i].input);
            if (out && *out == t.train[i].output) {
                bg.add(logic::Clause{logic::Atom{name, {id}}, {}});
            }
        }
    }
    if (!pos.empty()) {
        const auto task = meta::Task::make(std::move(bg), pos, {}, {meta::parse_metarule("[[P,Q],[P,A],[[Q,A]]]")},
                                           logic::PredicateId{"target", 1});
        const auto outcome = meta::learn(task, meta::SearchBudget{1, logic::kDefaultProverDepth, std::chrono::milliseconds(5000)});
        if (const auto* found = std::get_if<meta::Found>(&outcome); found != nullptr) {
            for (const auto& h : found->hypotheses) {
                if (h.size() == 1 && h.clauses[0].body.size() == 1) {
                    sol.transform = h.clauses[0].body[0].predicate;
                    break;
                }
            }
        }
    }
    for (const auto& p : t.test) {
        std::optional<Grid> g;
        if (!sol.transform.empty()) {
            g = apply_transform(sol.transform, p.input);
        }
        sol.predictions.push_back(g ? *g : p.input);
    }
    return sol;
}

} // namespace abductor::bench
