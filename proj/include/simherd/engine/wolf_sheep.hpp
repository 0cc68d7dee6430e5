#pragma once

// Wolf Sheep Predation, sheep-wolves-grass variant, on a discrete lattice.
//
// World: 51x51 torus. Each patch is grass or dirt with a regrowth countdown.
// Agents live on patch centres and move to one of the 8 neighbouring patches
// per tick. Agents are processed in id order; offspring born during a tick
// act from the next tick on.
//
// Random draw order (fixed, part of the determinism contract):
//   setup: patches row-major (grass coin, then countdown if dirt); then each
//          sheep (x, y, energy); then each wolf (x, y, energy).
//   step:  per sheep (direction, reproduce coin if alive); per wolf likewise.

#include <simherd/engine/model.hpp>

#include <array>
#include <cstdint>
#include <vector>

namespace simherd::engine {

struct Animal {
  std::uint64_t id = 0;
  int x = 0;
  int y = 0;
  long energy = 0;
  friend bool operator==(const Animal&, const Animal&) = default;
};

/// Population change bookkeeping since setup.
struct WolfSheepEvents {
  long sheep_born = 0;
  long sheep_starved = 0;
  long sheep_eaten = 0;
  long wolves_born = 0;
  long wolves_starved = 0;
};

class WolfSheepModel final : public Model {
 public:
  static constexpr int kWorldSize = 51;
  static constexpr std::string_view kKey = "wolf-sheep-predation";
  static constexpr std::string_view kGrassVersion = "sheep-wolves-grass";

  enum Param : std::size_t {
    initial_number_sheep,
    sheep_gain_from_food,
    sheep_reproduce,
    initial_number_wolves,
    wolf_gain_from_food,
    wolf_reproduce,
    grass_regrowth_time,
    model_version,
    show_energy,
  };

  explicit WolfSheepModel(long sheep_cap = 1000)
      : Model({
            ParamSpec::slider("initial-number-sheep", 0, 1, 250, 100),
            ParamSpec::slider("sheep-gain-from-food", 0, 1, 50, 4),
            ParamSpec::slider("sheep-reproduce", 1, 1, 20, 4),
            ParamSpec::slider("initial-number-wolves", 0, 1, 250, 50),
            ParamSpec::slider("wolf-gain-from-food", 0, 1, 100, 20),
            ParamSpec::slider("wolf-reproduce", 0, 1, 20, 5),
            ParamSpec::slider("grass-regrowth-time", 0, 1, 100, 30),
            ParamSpec::chooser("model-version", {"sheep-wolves", "sheep-wolves-grass"},
                               std::string(kGrassVersion)),
            ParamSpec::toggle("show-energy?", false),
        }),
        sheep_cap_(sheep_cap) {}

  std::string_view key() const override { return kKey; }
  std::unique_ptr<Model> clone() const override { return std::make_unique<WolfSheepModel>(*this); }

  void setup() override {
    const auto& version = value(model_version);
    if (!std::holds_alternative<std::string>(version) ||
        std::get<std::string>(version) != kGrassVersion) {
      throw Error(ErrorKind::setup, "model-version must be \"sheep-wolves-grass\", got " +
                                        format_value(version));
    }
    const long regrowth = numeric(grass_regrowth_time);
    grass_.assign(kCells, 0);
    countdown_.assign(kCells, 0);
    for (std::size_t cell = 0; cell < kCells; ++cell) {
      if (rng_.uniform_int(2) == 0) {
        grass_[cell] = 1;
      } else {
        countdown_[cell] = static_cast<long>(rng_.uniform_int(static_cast<std::uint64_t>(regrowth) + 1));
      }
    }
    next_id_ = 0;
    sheep_ = spawn(numeric(initial_number_sheep), numeric(sheep_gain_from_food));
    wolves_ = spawn(numeric(initial_number_wolves), numeric(wolf_gain_from_food));
    events_ = {};
    ticks_ = 0;
    set_up_ = true;
  }

  StepResult step() override {
    require_set_up();
    if (should_stop()) return StepResult::stopped;

    const long regrowth = numeric(grass_regrowth_time);
    move_sheep(regrowth);
    move_wolves();
    regrow_grass();
    ++ticks_;
    return should_stop() ? StepResult::stopped : StepResult::running;
  }

  bool should_stop() const override {
    if (sheep_.empty() && wolves_.empty()) return true;
    return wolves_.empty() && static_cast<long>(sheep_.size()) > sheep_cap_;
  }

  bool any_turtles() const override { return !sheep_.empty() || !wolves_.empty(); }

  std::optional<long> count(std::string_view breed) const override {
    if (breed == "sheep") return static_cast<long>(sheep_.size());
    if (breed == "wolves") return static_cast<long>(wolves_.size());
    if (breed == "turtles") return static_cast<long>(sheep_.size() + wolves_.size());
    if (breed == "patches") return static_cast<long>(kCells);
    return std::nullopt;
  }

  std::optional<std::string> named_reporter(std::string_view name) const override {
    if (name == "grass") {
      long total = 0;
      for (auto g : grass_) total += g;
      return std::to_string(total);
    }
    return Model::named_reporter(name);
  }

  const std::vector<Animal>& sheep() const { return sheep_; }
  const std::vector<Animal>& wolves() const { return wolves_; }
  const std::vector<std::uint8_t>& grass() const { return grass_; }
  const std::vector<long>& countdown() const { return countdown_; }
  const WolfSheepEvents& events() const { return events_; }
  long sheep_cap() const { return sheep_cap_; }
  void set_sheep_cap(long cap) { sheep_cap_ = cap; }

 private:
  static constexpr std::size_t kCells = static_cast<std::size_t>(kWorldSize) * kWorldSize;
  static constexpr std::array<std::array<int, 2>, 8> kNeighbours{
      {{-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}}};

  static std::size_t cell_of(const Animal& a) {
    return static_cast<std::size_t>(a.y) * kWorldSize + static_cast<std::size_t>(a.x);
  }

  std::vector<Animal> spawn(long n, long gain) {
    std::vector<Animal> animals;
    animals.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
      Animal a;
      a.id = next_id_++;
      a.x = static_cast<int>(rng_.uniform_int(kWorldSize));
      a.y = static_cast<int>(rng_.uniform_int(kWorldSize));
      a.energy = gain > 0 ? static_cast<long>(rng_.uniform_int(2 * static_cast<std::uint64_t>(gain))) : 0;
      animals.push_back(a);
    }
    return animals;
  }

  void move(Animal& a) {
    const auto& d = kNeighbours[rng_.uniform_int(kNeighbours.size())];
    a.x = (a.x + d[0] + kWorldSize) % kWorldSize;
    a.y = (a.y + d[1] + kWorldSize) % kWorldSize;
    a.energy -= 1;
  }

  // Returns true when a clone was appended.
  bool maybe_reproduce(std::vector<Animal>& herd, std::size_t i, long percent) {
    if (!rng_.chance_percent(static_cast<std::uint64_t>(percent))) return false;
    Animal child = herd[i];
    const long kept = herd[i].energy / 2;
    child.energy = herd[i].energy - kept;
    herd[i].energy = kept;
    child.id = next_id_++;
    herd.push_back(child);
    return true;
  }

  void move_sheep(long regrowth) {
    const long gain = numeric(sheep_gain_from_food);
    const long reproduce = numeric(sheep_reproduce);
    const std::size_t n = sheep_.size();
    std::vector<std::uint8_t> dead(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      move(sheep_[i]);
      const auto cell = cell_of(sheep_[i]);
      if (grass_[cell]) {
        sheep_[i].energy += gain;
        grass_[cell] = 0;
        countdown_[cell] = regrowth;
      }
      if (sheep_[i].energy < 0) {
        dead[i] = 1;
        ++events_.sheep_starved;
      } else if (maybe_reproduce(sheep_, i, reproduce)) {
        ++events_.sheep_born;
      }
    }
    dead.resize(sheep_.size(), 0);
    compact(sheep_, dead);
  }

  void move_wolves() {
    const long gain = numeric(wolf_gain_from_food);
    const long reproduce = numeric(wolf_reproduce);

    // Sheep indices per patch in ascending id order; head_[cell] skips eaten ones.
    std::vector<std::vector<std::size_t>> occupants(kCells);
    for (std::size_t s = 0; s < sheep_.size(); ++s) occupants[cell_of(sheep_[s])].push_back(s);
    std::vector<std::size_t> head(kCells, 0);
    std::vector<std::uint8_t> eaten(sheep_.size(), 0);

    const std::size_t n = wolves_.size();
    std::vector<std::uint8_t> dead(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      move(wolves_[i]);
      const auto cell = cell_of(wolves_[i]);
      auto& here = occupants[cell];
      if (head[cell] < here.size()) {
        eaten[here[head[cell]++]] = 1;
        ++events_.sheep_eaten;
        wolves_[i].energy += gain;
      }
      if (wolves_[i].energy < 0) {
        dead[i] = 1;
        ++events_.wolves_starved;
      } else if (maybe_reproduce(wolves_, i, reproduce)) {
        ++events_.wolves_born;
      }
    }
    dead.resize(wolves_.size(), 0);
    compact(wolves_, dead);
    compact(sheep_, eaten);
  }

  void regrow_grass() {
    for (std::size_t cell = 0; cell < kCells; ++cell) {
      if (grass_[cell]) continue;
      if (--countdown_[cell] <= 0) {
        grass_[cell] = 1;
        countdown_[cell] = 0;
      }
    }
  }

  static void compact(std::vector<Animal>& herd, const std::vector<std::uint8_t>& dead) {
    std::size_t out = 0;
    for (std::size_t i = 0; i < herd.size(); ++i) {
      if (!dead[i]) herd[out++] = herd[i];
    }
    herd.resize(out);
  }

  long sheep_cap_;
  std::uint64_t next_id_ = 0;
  std::vector<std::uint8_t> grass_;
  std::vector<long> countdown_;
  std::vector<Animal> sheep_;
  std::vector<Animal> wolves_;
  WolfSheepEvents events_;
};

}  // namespace simherd::engine
