#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>

#include "fieldsym/gauge_higgs.hpp"
#include "fieldsym/lattice.hpp"
#include "fieldsym/parser.hpp"
#include "fieldsym/symmetry.hpp"

using namespace fieldsym;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

const std::string kModelsDir = FIELDSYM_MODELS_DIR;

}  // namespace

static void BM_ParseModel(benchmark::State& state) {
    std::string text = read_file(kModelsDir + "/u1_higgs.ftl");
    for (auto _ : state) {
        ModelDef m = parse_model(text);
        benchmark::DoNotOptimize(m);
    }
}
BENCHMARK(BM_ParseModel);

static void BM_CanonicalizeKinetic(benchmark::State& state) {
    ModelDef m = load_model_file(kModelsDir + "/mexican_hat.ftl");
    ExprPtr raw = make_power(m.lagrangian, 2);
    for (auto _ : state) {
        ExprPtr c = canonicalize(raw, m.space);
        benchmark::DoNotOptimize(c);
    }
}
BENCHMARK(BM_CanonicalizeKinetic);

static void BM_VerifyLocalGauge(benchmark::State& state) {
    ModelDef m = load_model_file(kModelsDir + "/u1_higgs.ftl");
    const Transformation* t = m.find_transform("u1");
    for (auto _ : state) {
        SymmetryVerdict v = verify_local(m, *t);
        benchmark::DoNotOptimize(v);
    }
}
BENCHMARK(BM_VerifyLocalGauge);

static void BM_DeriveGaugeConstraints(benchmark::State& state) {
    ModelDef m = load_model_file(kModelsDir + "/u1_higgs.ftl");
    for (auto _ : state) {
        GaugeConstraints cs = derive_constraints(m);
        benchmark::DoNotOptimize(cs);
    }
}
BENCHMARK(BM_DeriveGaugeConstraints);

static void BM_LatticeHessian(benchmark::State& state) {
    ModelDef m = load_model_file(kModelsDir + "/mexican_hat.ftl");
    LatticeAction lattice(m, {static_cast<int>(state.range(0)), 1.0},
                          {{"lambda", 0.5}, {"v", 1.0}});
    VacuumConfig vac;
    vac.set("phi", {1}, Rational(1));
    vac.set("phi", {2}, Rational(0));
    std::vector<double> config = lattice.constant_config(vac);
    for (auto _ : state) {
        auto h = lattice.hessian(config);
        benchmark::DoNotOptimize(h);
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LatticeHessian)->Arg(8)->Arg(16)->Arg(32)->Complexity();

BENCHMARK_MAIN();
