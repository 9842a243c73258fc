#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "qspsem/apps.hpp"
#include "qspsem/cli.hpp"
#include "qspsem/io.hpp"

using namespace qspsem;

namespace {

double awkward(std::mt19937_64& rng) {
  switch (rng() % 8) {
    case 0: return -0.0;
    case 1: return std::numeric_limits<double>::denorm_min() * static_cast<double>(rng() % 1000 + 1);
    case 2: return std::ldexp(std::uniform_real_distribution<double>(-1, 1)(rng), static_cast<int>(rng() % 600) - 300);
    case 3: return 0.1 * static_cast<double>(static_cast<int>(rng() % 21) - 10);
    default: return std::uniform_real_distribution<double>(-4, 4)(rng);
  }
}

io::Document random_document(std::mt19937_64& rng, int kind) {
  switch (kind) {
    case 0: {
      std::vector<double> v(1 + rng() % 20);
      for (auto& x : v) x = awkward(rng);
      return PhaseList(v);
    }
    case 1: {
      std::vector<cplx> c(1 + rng() % 12);
      const bool real = rng() % 2;
      for (auto& x : c) x = cplx(awkward(rng), real ? 0.0 : awkward(rng));
      return ComplexPoly(c);
    }
    case 2: {
      Matrix m(1 + rng() % 5, 1 + rng() % 5);
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = cplx(awkward(rng), awkward(rng));
      return m;
    }
    case 3: {
      const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 5);
      std::vector<Eigen::Index> l{0}, r{n - 1};
      std::optional<Matrix> u;
      if (rng() % 2) u = detail::haar_unitary(n, rng);
      return QsvtProgram(testing_util::random_list(rng, 1 + rng() % 9, 3.0), Projector::basis_states(n, l),
                         Projector::basis_states(n, r), u);
    }
    default: {
      io::Report rep{"check-" + std::to_string(rng() % 100), rng() % 2 == 0, io::json::object()};
      rep.data["deviation"] = awkward(rng);
      rep.data["grid"] = static_cast<int>(rng() % 100);
      return rep;
    }
  }
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  std::ostringstream out, err;
  const int code = cli::run(std::move(args), out, err);
  if (out_text) *out_text = out.str();
  return code;
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "qspsem_test_io";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Documents, RoundTripBitExact) {
  std::mt19937_64 rng(31);
  for (int kind = 0; kind < 5; ++kind) {
    for (int t = 0; t < 100; ++t) {
      const auto doc = random_document(rng, kind);
      const auto text = io::serialize(doc);
      const auto back = io::parse(text);
      ASSERT_TRUE(io::same_document(doc, back)) << text;
      EXPECT_EQ(io::serialize(back), text);
    }
  }
}

TEST(Documents, SignedZeroIsPreserved) {
  const PhaseList z{0.0, -0.0};
  const auto back = io::expect<PhaseList>(io::parse(io::serialize(z)), "test");
  EXPECT_TRUE(std::signbit(back[1]));
  EXPECT_FALSE(io::same_document(z, PhaseList{0.0, 0.0}));
}

TEST(Documents, PolyOmitsZeroImaginaryPart) {
  const auto j = io::to_json(ComplexPoly{0.0, 1.0});
  EXPECT_FALSE(j.contains("imag"));
  EXPECT_TRUE(io::to_json(ComplexPoly{0.0, cplx(0, 1)}).contains("imag"));
}

TEST(Documents, Rejections) {
  EXPECT_THROW(io::parse("{"), ArgumentError);
  EXPECT_THROW(io::parse("[1, 2]"), ArgumentError);
  EXPECT_THROW(io::parse(R"({"kind": "phases"})"), ArgumentError);
  EXPECT_THROW(io::parse(R"({"kind": "phases", "phases": []})"), ArgumentError);
  EXPECT_THROW(io::parse(R"({"kind": "phases", "schema_version": 2, "phases": [0]})"), ArgumentError);
  EXPECT_THROW(io::parse(R"({"kind": "tensor"})"), ArgumentError);
  EXPECT_THROW(io::parse(R"({"kind": "matrix", "dim": [2, 2], "re": [[1, 0]]})"), ArgumentError);
  EXPECT_THROW(io::parse(R"({"kind": "poly", "real": [1, 2], "imag": [0]})"), ArgumentError);
  EXPECT_THROW(io::serialize(PhaseList{0.0}).size() && io::serialize(io::Document(Matrix::Constant(1, 1, NAN))).size(),
               ArgumentError);
  EXPECT_THROW(io::expect<PhaseList>(io::Document(ComplexPoly{1.0}), "synth"), ArgumentError);
}

TEST(Csv, HeaderRowsAndParseBack) {
  io::CsvWriter w({"kappa", "model", "qubits"});
  w.row(2.5, "one-way", 10);
  w.row(0.1, "two-way", 50);
  EXPECT_EQ(w.str(), "kappa,model,qubits\n2.5,one-way,10\n0.1,two-way,50\n");
  EXPECT_THROW(w.row(1.0), InternalConsistencyError);
  std::istringstream in(w.str());
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  EXPECT_EQ(std::stod(line.substr(0, line.find(','))), 2.5);
}

TEST(Cli, ExitCodes) {
  const auto x = scratch("x.json"), t3 = scratch("t3.json"), bad = scratch("bad.json"), phases = scratch("phases.json");
  io::write_text(x.string(), io::serialize(ComplexPoly{0.0, 1.0}));
  io::write_text(t3.string(), io::serialize(ComplexPoly{0.0, -3.0, 0.0, 4.0}));
  io::write_text(bad.string(), io::serialize(ComplexPoly{0.0, -2.4, 0.0, 3.2}));

  EXPECT_EQ(run_cli({"synth", x.string(), "-o", phases.string()}), 0);
  EXPECT_TRUE(io::same_document(io::read_document(phases.string()), PhaseList{0.0, -0.0}) ||
              io::same_document(io::read_document(phases.string()), PhaseList{0.0, 0.0}));
  std::string text;
  EXPECT_EQ(run_cli({"synth", t3.string()}, &text), 0);
  EXPECT_NE(text.find("\"phases\""), std::string::npos);
  EXPECT_EQ(run_cli({"synth", bad.string()}), 2);
  EXPECT_EQ(run_cli({"synth", scratch("missing.json").string()}), 64);
  EXPECT_EQ(run_cli({}), 64);
  EXPECT_EQ(run_cli({"frobnicate"}), 64);
  EXPECT_EQ(run_cli({"--help"}), 0);
  EXPECT_EQ(run_cli({"demo", "nothing"}), 64);
}

TEST(Cli, ToleranceFromEnvironment) {
  ::setenv("QSPSEM_TOL", "1e-3", 1);
  EXPECT_EQ(cli::tolerance(std::nullopt, 1e-9), 1e-3);
  EXPECT_EQ(cli::tolerance(1e-6, 1e-9), 1e-6);
  ::setenv("QSPSEM_TOL", "loose", 1);
  EXPECT_THROW(cli::tolerance(std::nullopt, 1e-9), ArgumentError);
  ::unsetenv("QSPSEM_TOL");
  EXPECT_EQ(cli::tolerance(std::nullopt, 1e-9), 1e-9);
}

TEST(Cli, DemoCsv) {
  const auto path = scratch("inversion.csv");
  ASSERT_EQ(run_cli({"demo", "distributed-inversion", "--emit", path.string()}), 0);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "kappa,one_way_total,two_way_total,one_way_rounds,two_way_rounds,two_way_success");
  std::vector<std::string> rows;
  for (std::string line; std::getline(in, line);) rows.push_back(line);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].substr(0, rows[0].find(',', rows[0].find(',') + 1)), "2,10");
}
