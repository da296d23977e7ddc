// tests/acceptance/acceptance.cpp

// Copyright 2026  The avfusion Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit status if
// any criterion fails. Tolerances and time limits are fixed below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "avfusion/align/bresenham.hpp"
#include "avfusion/decode/graph.hpp"
#include "avfusion/decode/viterbi.hpp"
#include "avfusion/experiment/artifacts.hpp"
#include "avfusion/experiment/config.hpp"
#include "avfusion/experiment/pipeline.hpp"
#include "avfusion/experiment/sweep.hpp"
#include "avfusion/fusion/oracle.hpp"
#include "avfusion/nn/gradcheck.hpp"
#include "avfusion/nn/network.hpp"
#include "avfusion/reliability/model_measures.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace avf;

namespace {

constexpr double kFormulaTol = 1e-9;
constexpr double kGradTol = 1e-4;
constexpr double kScoreTol = 1e-9;
constexpr double kOracleTol = 1e-6;
constexpr double kSpearmanMax = -0.9;
constexpr double kMinRelativeReduction = 0.15;

struct Outcome {
  bool ok = true;
  std::string detail;
};

int g_failures = 0;

void criterion(const std::string& name, double limit_s, const std::function<Outcome()>& body, bool cpu_time = false) {
  const auto w0 = std::chrono::steady_clock::now();
  const std::clock_t c0 = std::clock();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - w0).count();
  const double cpu = static_cast<double>(std::clock() - c0) / CLOCKS_PER_SEC;
  const double used = cpu_time ? cpu : wall;
  if (limit_s > 0 && used > limit_s) {
    o.ok = false;
    o.detail += "; over time limit";
  }
  if (!o.ok) ++g_failures;
  char timing[96];
  if (limit_s > 0)
    std::snprintf(timing, sizeof timing, "%.1f s %s, limit %.0f s", used, cpu_time ? "cpu" : "wall", limit_s);
  else
    std::snprintf(timing, sizeof timing, "%.1f s wall", wall);
  std::printf("%s  %-28s %s [%s]\n", o.ok ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), timing);
  std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
  char b[64];
  std::snprintf(b, sizeof b, f, v);
  return b;
}

// ---------------------------------------------------------------- formulas

Outcome formula_suite() {
  using reliability::dispersion;
  using reliability::entropy;
  using reliability::kl_divergence;
  using reliability::posterior_difference;
  using V = std::vector<double>;
  int bad = 0, checked = 0;
  auto near = [&](double got, double want) {
    ++checked;
    if (!(std::abs(got - want) <= kFormulaTol)) ++bad;
  };
  near(entropy(V{.25, .25, .25, .25}), std::log(4.0));
  near(entropy(V{.7, .2, .1}), -(0.7 * std::log(0.7) + 0.2 * std::log(0.2) + 0.1 * std::log(0.1)));
  near(dispersion(V{.25, .25, .25, .25}), 0.0);
  near(dispersion(V{.5, .3, .2}, 2), std::log(5.0 / 3.0));
  near(dispersion(V{.5, .3, .2}, 3), (std::log(5.0 / 3.0) + std::log(5.0 / 2.0) + std::log(3.0 / 2.0)) / 3.0);
  near(posterior_difference(V{.25, .25, .25, .25}), 0.0);
  near(posterior_difference(V{.5, .3, .2}, 3), (std::log(5.0 / 3.0) + std::log(5.0 / 2.0)) / 2.0);
  near(kl_divergence(V{.5, .5}, V{.25, .75}), 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0));
  near(kl_divergence(V{.3, .7}, V{.3, .7}), 0.0);
  const auto eh = reliability::entropy_ratio(V{1, 2, 3});
  near(eh[0], 1.0 / 10003.0);
  near(eh[1], 2.0 / 10003.0);
  near(eh[2], 10000.0 / 10003.0);
  const auto dr = reliability::dispersion_ratio(V{1, 2, 3});
  near(dr[0], 1e-4 / 5.0001);
  near(dr[1], 2.0 / 5.0001);
  near(dr[2], 3.0 / 5.0001);
  const auto dz = reliability::dispersion_ratio(V{5, 0, 0});
  near(dz[0], 5.0 / 5.0002);
  near(dz[1], 1e-4 / 5.0002);
  for (double w : reliability::entropy_ratio(V{0, 0, 0})) near(w, 1.0 / 3.0);
  Matrix q(2, 2);
  q << .5, .5, .25, .75;
  const auto td = reliability::temporal_divergence(q, 1, 1);
  near(td.values(0), 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0));
  near(td.values(1), td.values(0));
  const int examples = checked, example_bad = bad;

  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int bound_bad = 0;
  const int rows = 10000;
  Matrix prev;
  for (int k = 0; k < rows; ++k) {
    const int S = 2 + k % 40;
    Matrix raw(1, S);
    for (Eigen::Index i = 0; i < raw.size(); ++i) raw(0, i) = std::pow(u(rng), 1.0 + 6.0 * u(rng));
    if (k % 7 == 0) {  // one-hot rows hit the floor path
      raw.setZero();
      raw(0, k % S) = 1.0;
    }
    const Matrix p = normalize_rows(raw);
    const V a(p.data(), p.data() + S);
    Matrix other = normalize_rows(Matrix::NullaryExpr(1, S, [&](Eigen::Index) { return u(rng); }));
    const V b(other.data(), other.data() + S);
    const double h = entropy(a);
    if (!(h >= 0.0 && h <= std::log(static_cast<double>(S)) + 1e-12)) ++bound_bad;
    if (!(kl_divergence(a, b) >= 0.0)) ++bound_bad;
    if (!(dispersion(a) >= 0.0)) ++bound_bad;
    if (!(posterior_difference(a) >= 0.0)) ++bound_bad;
  }
  Outcome o;
  o.ok = bad == 0 && bound_bad == 0;
  o.detail = std::to_string(examples - example_bad) + "/" + std::to_string(examples) + " examples within 1e-9, " +
             std::to_string(bound_bad) + " bound violations over " + std::to_string(rows) + " rows";
  return o;
}

// ---------------------------------------------------------------- gradients

double grad_error(int in, const std::vector<nn::LayerSpec>& specs, std::uint64_t seed) {
  nn::Network net(in, specs);
  net.init(seed);
  std::mt19937_64 rng(seed + 100);
  std::normal_distribution<double> n(0.0, 1.0);
  for (auto* p : net.params())
    for (Eigen::Index i = 0; i < p->value.size(); ++i) p->value.data()[i] += 0.1 * n(rng);
  Matrix x(5, in), probe(5, net.output_dim());
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n(rng);
  for (Eigen::Index i = 0; i < probe.size(); ++i) probe.data()[i] = n(rng);
  const auto r = nn::gradient_check(net, x, probe);
  return r.checked > 0 ? r.max_rel_error : std::numeric_limits<double>::infinity();
}

Outcome gradient_suite() {
  using nn::LayerSpec;
  const std::vector<std::pair<int, std::vector<LayerSpec>>> cases = {
      {4, {LayerSpec::dense(3)}},
      {4, {LayerSpec::relu()}},
      {4, {LayerSpec::tanh()}},
      {4, {LayerSpec::layer_norm()}},
      {4, {LayerSpec::dropout(0.3)}},
      {3, {LayerSpec::lstm(4)}},
      {3, {LayerSpec::blstm(3)}},
      {5, {LayerSpec::log_softmax()}},
      {5, {LayerSpec::softmax()}},
      {3, {LayerSpec::dense(5), LayerSpec::tanh(), LayerSpec::lstm(4), LayerSpec::log_softmax()}},
      {3, {LayerSpec::dense(5), LayerSpec::relu(), LayerSpec::blstm(3), LayerSpec::dense(4)}},
      {4, {LayerSpec::layer_norm(), LayerSpec::dense(6), LayerSpec::dropout(0.2), LayerSpec::softmax()}},
      {3, {LayerSpec::lstm(4), LayerSpec::lstm(3), LayerSpec::blstm(2), LayerSpec::log_softmax()}},
      {6, {LayerSpec::dense(8), LayerSpec::dropout(0.15), LayerSpec::blstm(4), LayerSpec::dense(5)}},
  };
  double worst = 0.0;
  std::uint64_t seed = 1;
  for (const auto& [in, specs] : cases) worst = std::max(worst, grad_error(in, specs, seed++));
  return {worst < kGradTol, std::to_string(cases.size()) + " networks, max relative error " + fmt("%.2e", worst)};
}

// ---------------------------------------------------------------- decoder

decode::DecodingGraph graph_of(const oracle::ToyModel& m) {
  return decode::DecodingGraph(m.lexicon, m.num_states, m.self_loop, m.lm_start, m.lm_bigram, m.lm_scale);
}

Matrix random_scores(std::mt19937_64& rng, int T, int S) {
  std::normal_distribution<double> n(0.0, 2.0);
  Matrix m(T, S);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

Outcome decoder_suite() {
  constexpr int kInstances = 1000;
  std::mt19937_64 rng(777);
  int vit_bad = 0, vit_paths = 0;
  for (int k = 0; k < kInstances; ++k) {
    const auto m = oracle::random_toy_model(rng, 4);
    const int T = 1 + k % 6;
    const Matrix e = random_scores(rng, T, m.num_states);
    const auto want = oracle::brute_viterbi(e, m);
    const auto got = decode::viterbi_decode(e, graph_of(m));
    bool ok = std::abs(got.score - want.score) <= kScoreTol;
    if (want.num_optimal == 1) {
      ok = ok && got.states == want.states && got.words == want.words;
      ++vit_paths;
    }
    if (!ok) ++vit_bad;
  }
  int fa_bad = 0, fa_done = 0, fa_paths = 0;
  while (fa_done < kInstances) {
    const auto m = oracle::random_toy_model(rng, 4);
    const int V = static_cast<int>(m.lexicon.size());
    std::vector<int> transcript;
    const int len = 1 + static_cast<int>(rng() % 3);
    for (int i = 0; i < len; ++i) transcript.push_back(static_cast<int>(rng() % static_cast<unsigned>(V)));
    int L = 0;
    for (int w : transcript) L += static_cast<int>(m.lexicon[static_cast<std::size_t>(w)].size());
    if (L > 6) continue;
    const int T = L + static_cast<int>(rng() % static_cast<unsigned>(7 - L));
    const Matrix lp = random_scores(rng, T, m.num_states);
    const auto want = oracle::brute_forced_align(transcript, lp, m);
    const auto got = decode::forced_align(transcript, lp, graph_of(m));
    bool ok = static_cast<int>(got.size()) == T;
    if (want.num_optimal == 1) {
      ok = ok && got.states() == want.states;
      ++fa_paths;
    }
    if (!ok) ++fa_bad;
    ++fa_done;
  }
  return {vit_bad == 0 && fa_bad == 0,
          "viterbi " + std::to_string(kInstances - vit_bad) + "/" + std::to_string(kInstances) + " (" +
              std::to_string(vit_paths) + " unique paths), forced alignment " + std::to_string(fa_done - fa_bad) + "/" +
              std::to_string(fa_done) + " (" + std::to_string(fa_paths) + " unique paths)"};
}

// ---------------------------------------------------------------- oracle weights

Outcome oracle_suite() {
  constexpr int kInstances = 200;
  const auto grid = oracle::simplex_grid3(100);
  std::mt19937_64 rng(4242);
  int bad = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < kInstances; ++k) {
    const int T = 1 + k % 3, S = 2 + k % 5;
    std::vector<Matrix> s(3, Matrix(T, S));
    std::vector<int> target;
    for (int t = 0; t < T; ++t) {
      const Matrix a = oracle::random_log_rows(rng, 3, S, 1.0 + 3.0 * (k % 4));
      for (int i = 0; i < 3; ++i) s[static_cast<std::size_t>(i)].row(t) = a.row(i);
      target.push_back(static_cast<int>(rng() % static_cast<unsigned>(S)));
    }
    const AlignmentTarget tgt(target, S);
    for (auto mode : {fusion::OracleMode::Linear, fusion::OracleMode::Renormalized}) {
      const auto w = fusion::oracle_weights(s, tgt, mode);
      for (int t = 0; t < T; ++t) {
        Matrix a(3, S);
        for (int i = 0; i < 3; ++i) a.row(i) = s[static_cast<std::size_t>(i)].row(t);
        const int y = target[static_cast<std::size_t>(t)];
        auto ce = [&](const RowVector& l) {
          return mode == fusion::OracleMode::Linear ? oracle::linear_ce(a, l, y) : oracle::renormalized_ce(a, l, y);
        };
        const double mine = ce(w.weights.row(t));
        double best = std::numeric_limits<double>::infinity();
        for (const auto& g : grid) best = std::min(best, ce(g));
        worst = std::max(worst, mine - best);
        if (!(mine <= best + kOracleTol) || !w.on_simplex()) ++bad;
      }
    }
  }
  return {bad == 0, std::to_string(kInstances) + " instances x 2 modes vs " + std::to_string(grid.size()) +
                        "-point grid, worst excess " + fmt("%.2e", worst) + ", " + std::to_string(bad) + " violations"};
}

// ---------------------------------------------------------------- bresenham

Outcome bresenham_suite() {
  long maps = 0, bad = 0;
  for (int T = 1; T <= 200; ++T)
    for (int V = 1; V <= T; ++V) {
      ++maps;
      const auto m = bresenham_map(T, V);
      bool ok = static_cast<int>(m.size()) == T && m[0] == 0 && m[static_cast<std::size_t>(T - 1)] == V - 1;
      std::vector<int> count(static_cast<std::size_t>(V), 0);
      for (int t = 0; ok && t < T; ++t) {
        const int v = m[static_cast<std::size_t>(t)];
        if (v < 0 || v >= V) {
          ok = false;
          break;
        }
        if (t > 0) {
          const int step = v - m[static_cast<std::size_t>(t - 1)];
          ok = step == 0 || step == 1;
        }
        ++count[static_cast<std::size_t>(v)];
      }
      for (int c : count) ok = ok && c >= T / V && c <= (T + V - 1) / V;
      if (!ok) ++bad;
    }
  return {bad == 0, std::to_string(maps - bad) + "/" + std::to_string(maps) + " maps monotone, covering, balanced"};
}

// ---------------------------------------------------------------- trend

struct SweepRun {
  std::vector<experiment::SeedResult> seeds;
  experiment::SweepTable table;
  fs::path dir;
};

SweepRun run_sweep(const experiment::ExperimentConfig& cfg, int threads, const fs::path& dir) {
  SweepRun r;
  for (auto seed : cfg.seeds) r.seeds.push_back(experiment::run_seed(cfg, seed, threads));
  fs::remove_all(dir);
  fs::create_directories(dir);
  r.table = experiment::write_report(dir, r.seeds);
  r.dir = dir;
  return r;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

int main() {
  criterion("formula-suite", 10, formula_suite);
  criterion("gradient-checks", 60, gradient_suite);
  criterion("decoder-oracle", 60, decoder_suite);
  criterion("oracle-optimality", 120, oracle_suite);
  criterion("bresenham", 5, bresenham_suite);

  const auto cfg = experiment::load_experiment_config(std::string(AVFUSION_SOURCE_DIR) + "/configs/sweep.json");
  const fs::path out = fs::current_path() / "acceptance_out";
  SweepRun first;
  criterion("sweep-run", 600, [&]() -> Outcome {
    first = run_sweep(cfg, 1, out / "run1");
    return {true, std::to_string(first.seeds.size()) + " seeds, " + std::to_string(first.table.columns.size() - 1) +
                      " conditions; table in " + first.dir.string()};
  }, true);

  const auto& t = first.table;
  const bool have = !first.seeds.empty();
  auto avg = [&](const std::string& s) { return t.at(s, "avg"); };

  criterion("trend-a-ao-vs-snr", 0, [&]() -> Outcome {
    if (!have) return {false, "no sweep results"};
    std::vector<double> snr, wer;
    for (std::size_t c = 0; c + 1 < t.columns.size(); ++c) {
      snr.push_back(t.columns[c] == "clean" ? 1e9 : std::stod(t.columns[c]));
      wer.push_back(t.at("ao", t.columns[c]));
    }
    const double rho = oracle::spearman(snr, wer);
    return {rho <= kSpearmanMax, "spearman " + fmt("%.3f", rho) + " (need <= -0.9)"};
  });
  criterion("trend-b-blstm-vs-ao", 0, [&]() -> Outcome {
    if (!have) return {false, "no sweep results"};
    const double ao = avg("ao"), b = avg("dfn-blstm");
    const double red = ao > 0 ? (ao - b) / ao : 0.0;
    return {b < ao && red >= kMinRelativeReduction,
            "AO " + fmt("%.2f", 100 * ao) + "%, DFN-BLSTM " + fmt("%.2f", 100 * b) + "%, relative reduction " +
                fmt("%.1f", 100 * red) + "% (need >= 15%)"};
  });
  criterion("trend-c-oracle", 0, [&]() -> Outcome {
    if (!have) return {false, "no sweep results"};
    const double o = avg("oracle");
    const double single = std::min({avg("ao"), avg("va"), avg("vs")});
    return {o <= single && o <= avg("static"), "oracle " + fmt("%.2f", 100 * o) + "%, best single stream " +
                                                   fmt("%.2f", 100 * single) + "%, static " +
                                                   fmt("%.2f", 100 * avg("static")) + "%"};
  });
  criterion("trend-d-blstm-valid-ce", 0, [&]() -> Outcome {
    if (!have) return {false, "no sweep results"};
    std::vector<double> b, l;
    for (const auto& s : first.seeds) {
      b.push_back(s.training.at("dfn-blstm").at("best_valid").get<double>());
      l.push_back(s.training.at("dfn-lstm").at("best_valid").get<double>());
    }
    const double mb = median(b), ml = median(l);
    return {mb <= ml, "median validation CE BLSTM " + fmt("%.4f", mb) + ", LSTM " + fmt("%.4f", ml)};
  });
  criterion("trend-e-early-vs-ao", 0, [&]() -> Outcome {
    if (!have) return {false, "no sweep results"};
    return {avg("early") <= avg("ao"), "early " + fmt("%.2f", 100 * avg("early")) + "%, AO " + fmt("%.2f", 100 * avg("ao")) + "%"};
  });

  criterion("reproducibility", 0, [&]() -> Outcome {
    if (!have) return {false, "no first run"};
    const auto second = run_sweep(cfg, 2, out / "run2");
    bool same = true;
    std::string detail;
    for (const char* f : {"results.csv", "wer_vs_snr.csv"}) {
      const bool eq = slurp(first.dir / f) == slurp(second.dir / f) && !slurp(first.dir / f).empty();
      same = same && eq;
      detail += std::string(detail.empty() ? "" : ", ") + f + (eq ? " identical" : " differs");
    }
    return {same, detail + " (threads 1 vs 2)"};
  });

  std::printf("%s: %d criteria failed\n", g_failures ? "FAIL" : "PASS", g_failures);
  return g_failures ? 1 : 0;
}
