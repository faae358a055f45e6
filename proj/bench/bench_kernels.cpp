// Serial reference kernels against their parallel counterparts on the Galaga
// corner at h = 0.05. Worker count is the benchmark argument.
#include <benchmark/benchmark.h>

#include <memory>

#include "kinoclear/clearance.hpp"
#include "kinoclear/reach.hpp"
#include "kinoclear/scene.hpp"
#include "kinoclear/systems.hpp"

using namespace kinoclear;

namespace {

const Scene& scene() {
  static const Scene s = builtin_scene("galaga-corner");
  return s;
}

const std::vector<double> kSpacing{0.05, 0.05};

std::shared_ptr<const ControlSystem> galaga() {
  static const auto s = std::make_shared<const ControlSystem>(builtin_system("galaga", 32));
  return s;
}

std::shared_ptr<const Lattice> lattice() {
  static const auto l = std::make_shared<const Lattice>(build_lattice(scene(), galaga()->axes, kSpacing));
  return l;
}

GraphOptions graph_options() {
  GraphOptions go;
  go.tau = 0.05;
  return go;
}

std::shared_ptr<const PrimitiveGraph> graph() {
  static const auto g = std::make_shared<const PrimitiveGraph>(build_graph(galaga(), lattice(), graph_options()));
  return g;
}

const ClearanceField& field() {
  static const ClearanceField cf = clearance_field(graph());
  return cf;
}

std::vector<NodeId> boundary() {
  std::vector<NodeId> out;
  const Lattice& lat = *lattice();
  for (std::size_t i = 0; i < lat.node_count(); ++i)
    if (lat.node_class(static_cast<NodeId>(i)) == NodeClass::boundary) out.push_back(static_cast<NodeId>(i));
  return out;
}

void BM_LatticeSerial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(build_lattice_serial(scene(), galaga()->axes, kSpacing));
}
void BM_Lattice(benchmark::State& st) {
  const Execution ex{static_cast<int>(st.range(0))};
  for (auto _ : st) benchmark::DoNotOptimize(build_lattice(scene(), galaga()->axes, kSpacing, ex));
}

void BM_GraphSerial(benchmark::State& st) {
  lattice();
  for (auto _ : st) benchmark::DoNotOptimize(build_graph_serial(galaga(), lattice(), graph_options()));
}
void BM_Graph(benchmark::State& st) {
  const Execution ex{static_cast<int>(st.range(0))};
  for (auto _ : st) benchmark::DoNotOptimize(build_graph(galaga(), lattice(), graph_options(), ex));
}

void BM_Dijkstra(benchmark::State& st) {
  const auto targets = boundary();
  const auto g = graph();
  for (auto _ : st) benchmark::DoNotOptimize(cost_to(*g, targets));
}
void BM_LabelCorrecting(benchmark::State& st) {
  const auto targets = boundary();
  const SearchOptions o{SearchMode::parallel_label_correcting, kUnreachable, Execution{static_cast<int>(st.range(0))}};
  const auto g = graph();
  for (auto _ : st) benchmark::DoNotOptimize(cost_to(*g, targets, o));
}

void BM_EnvelopeSerial(benchmark::State& st) {
  field();
  for (auto _ : st) benchmark::DoNotOptimize(envelope_serial(field(), 0.28));
}
void BM_Envelope(benchmark::State& st) {
  const Execution ex{static_cast<int>(st.range(0))};
  for (auto _ : st) benchmark::DoNotOptimize(envelope(field(), 0.28, ex));
}

}  // namespace

BENCHMARK(BM_LatticeSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Lattice)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GraphSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Graph)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Dijkstra)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LabelCorrecting)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnvelopeSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Envelope)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
