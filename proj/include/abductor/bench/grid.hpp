#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace abductor::bench {

/// Rectangular grid of colours 0-9, row-major.
class Grid {
public:
    Grid() = default;
    /// Throws std::invalid_argument unless cells.size() == rows * cols and every cell is in 0..9.
    static Grid make(std::size_t rows, std::size_t cols, std::vector<int> cells);
    static Grid row(std::vector<int> cells) {
        const auto n = cells.size();
        return make(1, n, std::move(cells));
    }
    /// From nested integer arrays; throws std::invalid_argument on ragged rows.
    static Grid from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    const std::vector<int>& cells() const noexcept { return cells_; }
    int at(std::size_t r, std::size_t c) const { return cells_.at(r * cols_ + c); }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<int> cells_;
};

/// Mismatching cells over the union bounding box; a cell present in only one
/// grid counts as a mismatch.
std::size_t hamming(const Grid& a, const Grid& b);

struct GridPair {
    Grid input;
    Grid output;
};

/// ARC task document: {"train": [{"input", "output"}], "test": [...]}.
struct ArcTask {
    std::string id;
    std::vector<GridPair> train;
    std::vector<GridPair> test;
};

ArcTask parse_arc_task(const nlohmann::json& j, std::string id = "");
/// Throws std::invalid_argument when the file cannot be read or parsed.
ArcTask load_arc_task(const std::string& path);

/// Names of the one-row transformations known to the grid-1d suite.
const std::vector<std::string>& grid1d_transforms();
/// Applies a named transformation; nullopt when it does not apply to this input.
std::optional<Grid> apply_transform(const std::string& name, const Grid& g);

/// Random one-row task produced by one transformation.
ArcTask gen_grid1d_task(std::uint64_t seed, std::size_t n_train = 3, std::size_t width = 12);

struct GridSolution {
    /// Empty when no transformation is consistent with every training pair.
    std::string transform;
    std::vector<Grid> predictions;
};

/// Induces the transformation with the meta-learner: each training pair is a
/// positive example and every transformation that maps its input to its
/// output is a background fact about it.
GridSolution solve_grid_task(const ArcTask& t);

} // namespace abductor::bench
