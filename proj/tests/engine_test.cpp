#include <simherd/engine/registry.hpp>

#include <gtest/gtest.h>

#include <deque>
#include <utility>

using namespace simherd;
using namespace simherd::engine;

namespace {

WolfSheepModel wsp(long sheep, long wolves, std::uint64_t seed = 1) {
  WolfSheepModel m;
  m.set_param("initial-number-sheep", double(sheep));
  m.set_param("initial-number-wolves", double(wolves));
  m.reseed(seed);
  return m;
}

FireModel fire(long density, std::uint64_t seed) {
  FireModel m;
  m.set_param("density", double(density));
  m.reseed(seed);
  m.setup();
  return m;
}

// Independent oracle: a fire started in column 0 burns exactly the trees
// 4-connected to that column, whatever order the spread is simulated in.
long flood_fill_burned(const std::vector<Cell>& initial) {
  constexpr int n = FireModel::kWorldSize;
  std::vector<char> seen(initial.size(), 0);
  std::deque<std::pair<int, int>> queue;
  for (int y = 0; y < n; ++y) {
    const auto idx = static_cast<std::size_t>(y) * n;
    if (initial[idx] != Cell::empty) {
      seen[idx] = 1;
      queue.emplace_back(0, y);
    }
  }
  long reached = 0;
  while (!queue.empty()) {
    auto [x, y] = queue.front();
    queue.pop_front();
    const int dx[] = {1, -1, 0, 0};
    const int dy[] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      const int nx = x + dx[k], ny = y + dy[k];
      if (nx < 0 || ny < 0 || nx >= n || ny >= n) continue;
      const auto idx = static_cast<std::size_t>(ny) * n + nx;
      if (seen[idx] || initial[idx] == Cell::empty) continue;
      seen[idx] = 1;
      ++reached;
      queue.emplace_back(nx, ny);
    }
  }
  return reached;
}

long run_to_stop(Model& m, long limit = 100000) {
  long steps = 0;
  while (m.step() == StepResult::running && ++steps < limit) {
  }
  return steps;
}

}  // namespace

TEST(Prng, SameSeedSameSequence) {
  Prng a(999), b(999), c(1000);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    differs |= x != c.next();
  }
  EXPECT_TRUE(differs);
}

TEST(Prng, UniformIntStaysInRange) {
  Prng rng(7);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto v = rng.uniform_int(7);
    ASSERT_LT(v, 7u);
    ++hist[v];
  }
  for (int h : hist) EXPECT_NEAR(h, 10000, 500);
  EXPECT_THROW(rng.uniform_int(0), std::invalid_argument);
}

TEST(WolfSheep, SetupCreatesRequestedPopulations) {
  auto m = wsp(100, 100);
  m.setup();
  EXPECT_EQ(m.count("sheep"), 100);
  EXPECT_EQ(m.count("wolves"), 100);
  EXPECT_EQ(m.ticks(), 0);
  for (const auto& s : m.sheep()) {
    EXPECT_GE(s.energy, 0);
    EXPECT_LT(s.energy, 2 * 4);
  }
  for (const auto& w : m.wolves()) EXPECT_LT(w.energy, 2 * 20);
  for (std::size_t c = 0; c < m.grass().size(); ++c) {
    if (!m.grass()[c]) {
      EXPECT_LE(m.countdown()[c], 30);
    }
  }
}

TEST(WolfSheep, SeededSetupIsReproducible) {
  auto m = wsp(100, 100);
  m.reseed(999);
  m.setup();
  const auto sheep = m.sheep();
  const auto wolves = m.wolves();
  const auto grass = m.grass();
  m.reseed(999);
  m.setup();
  EXPECT_EQ(sheep, m.sheep());
  EXPECT_EQ(wolves, m.wolves());
  EXPECT_EQ(grass, m.grass());
}

TEST(WolfSheep, ZeroRegrowthTimeGivesZeroCountdown) {
  auto m = wsp(10, 10);
  m.set_param("grass-regrowth-time", 0.0);
  m.setup();
  for (auto c : m.countdown()) EXPECT_EQ(c, 0);
}

TEST(WolfSheep, RejectsOtherModelVersions) {
  auto m = wsp(10, 10);
  m.set_param("model-version", std::string("sheep-wolves"));
  try {
    m.setup();
    FAIL() << "setup should fail";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::setup);
  }
}

TEST(WolfSheep, StepBeforeSetupFails) {
  WolfSheepModel m;
  EXPECT_THROW(m.step(), Error);
}

TEST(WolfSheep, EmptyWorldStopsOnFirstStep) {
  auto m = wsp(0, 0);
  m.setup();
  EXPECT_EQ(m.step(), StepResult::stopped);
  EXPECT_EQ(m.ticks(), 0);
}

TEST(WolfSheep, SheepCapStopsWhenWolvesAreGone) {
  auto m = wsp(250, 0);
  m.set_param("sheep-reproduce", 20.0);
  m.set_param("sheep-gain-from-food", 50.0);
  m.set_sheep_cap(300);
  m.setup();
  run_to_stop(m, 1000);
  EXPECT_TRUE(m.should_stop());
  EXPECT_GT(*m.count("sheep"), 300);
  EXPECT_EQ(*m.count("wolves"), 0);
}

TEST(WolfSheep, ParamSpecsMatchInterfaceOrder) {
  WolfSheepModel m;
  const auto& specs = m.param_specs();
  ASSERT_EQ(specs.size(), 9u);
  const std::vector<std::string> expected{
      "initial-number-sheep", "sheep-gain-from-food", "sheep-reproduce",
      "initial-number-wolves", "wolf-gain-from-food", "wolf-reproduce",
      "grass-regrowth-time", "model-version", "show-energy?"};
  EXPECT_EQ(m.param_names(), expected);
  int numeric = 0;
  for (const auto& s : specs) numeric += s.kind == ParamKind::numeric ? 1 : 0;
  EXPECT_EQ(numeric, 7);
  EXPECT_EQ(specs[7].kind, ParamKind::choice);
  EXPECT_EQ(specs[8].kind, ParamKind::boolean);
}

TEST(WolfSheep, RangesAdmitCalibratedIndividual) {
  WolfSheepModel m;
  const std::vector<double> best{236, 3, 1, 47, 92, 0, 97};
  for (std::size_t i = 0; i < best.size(); ++i) {
    const auto& spec = m.param_specs()[i];
    EXPECT_GE(best[i], spec.min) << spec.name;
    EXPECT_LE(best[i], spec.max) << spec.name;
    EXPECT_NO_THROW(m.set_param(spec.name, best[i]));
    EXPECT_EQ(std::get<double>(m.get_param(spec.name)), best[i]);
  }
}

TEST(WolfSheep, SetParamSnapsTowardMinAndChecksRange) {
  WolfSheepModel m;
  m.set_param("sheep-gain-from-food", 23.7);
  EXPECT_EQ(std::get<double>(m.get_param("sheep-gain-from-food")), 23.0);
  EXPECT_THROW(m.set_param("sheep-gain-from-food", 51.0), Error);
  EXPECT_THROW(m.set_param("sheep-gain-from-food", -1.0), Error);
  EXPECT_THROW(m.set_param("no-such-thing", 1.0), Error);
  EXPECT_THROW(m.set_param("show-energy?", 1.0), Error);
  EXPECT_THROW(m.set_param("sheep-gain-from-food", std::string("x")), Error);
}

TEST(WolfSheep, RandomParamsStayOnLatticeAndKeepDefaults) {
  WolfSheepModel m;
  m.set_param("model-version", std::string("sheep-wolves"));
  m.set_param("show-energy?", true);
  for (int trial = 0; trial < 200; ++trial) {
    m.set_params_random();
    for (const auto& spec : m.param_specs()) {
      const auto& v = m.get_param(spec.name);
      if (spec.kind == ParamKind::numeric) {
        const double x = std::get<double>(v);
        EXPECT_GE(x, spec.min);
        EXPECT_LE(x, spec.max);
        EXPECT_EQ(x, std::floor(x));
      } else {
        EXPECT_EQ(v, spec.default_value);
      }
    }
  }
}

// Invariants checked over many random configurations: energies non-negative,
// countdowns bounded, one tick per running step, stop soundness, and
// population bookkeeping (births - starvation - predation).
TEST(WolfSheep, PropertyInvariantsOverRandomConfigurations) {
  Prng draw(2024);
  for (int trial = 0; trial < 40; ++trial) {
    WolfSheepModel m;
    m.reseed(draw.next());
    m.set_params_random();
    m.set_param("initial-number-sheep", double(draw.uniform_int(120)));
    m.set_param("initial-number-wolves", double(draw.uniform_int(60)));
    m.setup();
    const long regrowth = static_cast<long>(std::get<double>(m.get_param("grass-regrowth-time")));
    for (int t = 0; t < 60; ++t) {
      const auto before_tick = m.ticks();
      const auto before = m.events();
      const long sheep_before = *m.count("sheep");
      const long wolves_before = *m.count("wolves");
      const bool was_stopped = m.should_stop();
      const auto result = m.step();
      EXPECT_EQ(result == StepResult::stopped, m.should_stop());
      if (was_stopped) {
        EXPECT_EQ(m.ticks(), before_tick);
        break;
      }
      EXPECT_EQ(m.ticks(), before_tick + 1);
      const auto& after = m.events();
      EXPECT_EQ(*m.count("sheep") - sheep_before,
                (after.sheep_born - before.sheep_born) - (after.sheep_starved - before.sheep_starved) -
                    (after.sheep_eaten - before.sheep_eaten));
      EXPECT_EQ(*m.count("wolves") - wolves_before,
                (after.wolves_born - before.wolves_born) - (after.wolves_starved - before.wolves_starved));
      for (const auto& a : m.sheep()) ASSERT_GE(a.energy, 0);
      for (const auto& a : m.wolves()) ASSERT_GE(a.energy, 0);
      for (auto c : m.countdown()) ASSERT_LE(c, regrowth);
      if (result == StepResult::stopped) break;
    }
  }
}

TEST(WolfSheep, WolvesNeverIncreaseWithoutReproduction) {
  auto m = wsp(236, 47, 5);
  for (auto [name, v] : std::vector<std::pair<std::string, double>>{
           {"sheep-gain-from-food", 3}, {"sheep-reproduce", 1}, {"wolf-gain-from-food", 92},
           {"wolf-reproduce", 0}, {"grass-regrowth-time", 97}}) {
    m.set_param(name, v);
  }
  m.setup();
  long previous = *m.count("wolves");
  for (int t = 0; t < 200 && m.step() == StepResult::running; ++t) {
    EXPECT_LE(*m.count("wolves"), previous);
    previous = *m.count("wolves");
  }
}

TEST(WolfSheep, CloneIsIndependentAndEqual) {
  auto m = wsp(50, 20, 3);
  m.setup();
  auto copy = m.clone();
  for (int i = 0; i < 20; ++i) {
    m.step();
    copy->step();
  }
  const auto& c = dynamic_cast<const WolfSheepModel&>(*copy);
  EXPECT_EQ(m.sheep(), c.sheep());
  EXPECT_EQ(m.wolves(), c.wolves());
}

TEST(Fire, ZeroDensityHasNoTrees) {
  auto m = fire(0, 1);
  EXPECT_EQ(m.initial_trees(), 0);
  EXPECT_EQ(m.count("turtles"), 0);
  EXPECT_EQ(m.step(), StepResult::stopped);
}

TEST(Fire, DensityOutOfRangeIsRejected) {
  FireModel m;
  EXPECT_THROW(m.set_param("density", 150.0), Error);
}

TEST(Fire, SpreadMatchesFloodFillOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (long density : {30L, 55L, 59L, 62L, 80L}) {
      auto m = fire(density, seed);
      auto initial = m.cells();
      run_to_stop(m);
      EXPECT_EQ(m.burned_trees(), flood_fill_burned(initial)) << density << " seed " << seed;
    }
  }
}

TEST(Fire, BurnedTreesMonotoneAndConserved) {
  auto m = fire(65, 42);
  long previous = 0;
  long last_advance = 0;
  while (true) {
    const auto result = m.step();
    EXPECT_GE(m.burned_trees(), previous);
    if (m.burned_trees() > previous) last_advance = m.ticks();
    previous = m.burned_trees();
    long trees = 0;
    for (auto c : m.cells()) trees += c != Cell::empty ? 1 : 0;
    EXPECT_EQ(trees, m.initial_trees());
    if (result == StepResult::stopped) break;
  }
  EXPECT_LE(m.ticks(), last_advance + FireModel::kWorldSize + 1);
}

TEST(Fire, PercolationAboveAndBelowThreshold) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto dense = fire(99, seed);
    run_to_stop(dense);
    EXPECT_GT(double(dense.burned_trees()) / dense.initial_trees(), 0.95);
    auto sparse = fire(40, seed);
    run_to_stop(sparse);
    EXPECT_LT(double(sparse.burned_trees()) / sparse.initial_trees(), 0.25);
  }
}

TEST(Registry, MapsNlogoPathsToKeys) {
  EXPECT_EQ(model_key_from_path("models/Wolf Sheep Predation.nlogo"), "wolf-sheep-predation");
  EXPECT_EQ(model_key_from_path("C:\\x\\Fire.nlogo"), "fire");
  EXPECT_EQ(model_key_from_path("./Fire.nlogo"), "fire");
  EXPECT_EQ(model_key_from_path("wolf-sheep-predation"), "wolf-sheep-predation");
  EXPECT_EQ(make_model("Wolf Sheep Predation.nlogo")->key(), "wolf-sheep-predation");
  try {
    make_model("Ethnocentrism.nlogo");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::not_found);
  }
}
