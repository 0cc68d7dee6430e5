#pragma once

// Forest fire percolation on a 101x101 grid without wrapping. Trees in the
// leftmost column start burning; each tick every burning cell ignites its four
// tree neighbours and then burns out. burned-trees counts trees ignited by
// spread, so the initial column is not included.

#include <simherd/engine/model.hpp>

#include <cstdint>
#include <vector>

namespace simherd::engine {

enum class Cell : std::uint8_t { empty, tree, burning, burned };

class FireModel final : public Model {
 public:
  static constexpr int kWorldSize = 101;
  static constexpr std::string_view kKey = "fire";

  FireModel() : Model({ParamSpec::slider("density", 0, 1, 99, 57)}) {}

  std::string_view key() const override { return kKey; }
  std::unique_ptr<Model> clone() const override { return std::make_unique<FireModel>(*this); }

  void setup() override {
    const auto density = static_cast<std::uint64_t>(numeric(0));
    cells_.assign(kCells, Cell::empty);
    for (auto& cell : cells_) {
      if (rng_.chance_percent(density)) cell = Cell::tree;
    }
    initial_trees_ = 0;
    for (auto cell : cells_) initial_trees_ += cell == Cell::tree ? 1 : 0;
    frontier_.clear();
    for (int y = 0; y < kWorldSize; ++y) {
      const auto idx = index(0, y);
      if (cells_[idx] == Cell::tree) {
        cells_[idx] = Cell::burning;
        frontier_.push_back(idx);
      }
    }
    burned_trees_ = 0;
    ticks_ = 0;
    set_up_ = true;
  }

  StepResult step() override {
    require_set_up();
    if (should_stop()) return StepResult::stopped;

    std::vector<std::size_t> next;
    for (const auto idx : frontier_) {
      const int x = static_cast<int>(idx % kWorldSize);
      const int y = static_cast<int>(idx / kWorldSize);
      ignite(x - 1, y, next);
      ignite(x + 1, y, next);
      ignite(x, y - 1, next);
      ignite(x, y + 1, next);
    }
    for (const auto idx : frontier_) cells_[idx] = Cell::burned;
    frontier_ = std::move(next);
    ++ticks_;
    return should_stop() ? StepResult::stopped : StepResult::running;
  }

  bool should_stop() const override { return frontier_.empty(); }
  bool any_turtles() const override { return !frontier_.empty(); }

  std::optional<long> count(std::string_view breed) const override {
    if (breed == "turtles" || breed == "fires") return static_cast<long>(frontier_.size());
    if (breed == "patches") return static_cast<long>(kCells);
    return std::nullopt;
  }

  std::optional<std::string> named_reporter(std::string_view name) const override {
    if (name == "burned-trees") return std::to_string(burned_trees_);
    if (name == "initial-trees") return std::to_string(initial_trees_);
    return Model::named_reporter(name);
  }

  long burned_trees() const { return burned_trees_; }
  long initial_trees() const { return initial_trees_; }
  const std::vector<Cell>& cells() const { return cells_; }

 private:
  static constexpr std::size_t kCells = static_cast<std::size_t>(kWorldSize) * kWorldSize;

  static std::size_t index(int x, int y) {
    return static_cast<std::size_t>(y) * kWorldSize + static_cast<std::size_t>(x);
  }

  void ignite(int x, int y, std::vector<std::size_t>& next) {
    if (x < 0 || y < 0 || x >= kWorldSize || y >= kWorldSize) return;
    const auto idx = index(x, y);
    if (cells_[idx] != Cell::tree) return;
    cells_[idx] = Cell::burning;
    ++burned_trees_;
    next.push_back(idx);
  }

  std::vector<Cell> cells_;
  std::vector<std::size_t> frontier_;
  long initial_trees_ = 0;
  long burned_trees_ = 0;
};

}  // namespace simherd::engine
