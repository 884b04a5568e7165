#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

#include "ddi/cli.hpp"
#include "ddi/synthetic.hpp"

namespace fixture {

namespace fs = std::filesystem;

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "ddi") {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            (tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline void write(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Toy corpus: 6 drugs with 2-d embeddings and 10 raw pairs. Expected PU
// labels: 4 Positive, 5 ReliableNegative, 1 Unknown (D3-D6 share CYP2D6).
// D6 has no scaffold.
inline ddi::cli::Paths write_toy(const fs::path& dir) {
  ddi::cli::Paths p;
  p.drugs = dir / "drugs.csv";
  p.mol2vec = dir / "mol2vec.jsonl";
  p.smilesbert = dir / "smilesbert.jsonl";
  p.profiles = dir / "profiles.jsonl";
  p.pairs = dir / "pairs.csv";
  p.scaffolds = dir / "scaffolds.csv";
  p.output_dir = dir / "out";
  write(p.drugs, "drug_id,smiles\nD1,CCO\nD2,c1ccccc1\nD3,CCN\nD4,\nD5,CC(=O)O\nD6,CCCl\n");
  write(p.mol2vec,
        R"({"drug_id": "D1", "source": "mol2vec", "vector": [0.1, 0.9]}
{"drug_id": "D2", "source": "mol2vec", "vector": [0.2, 0.8]}
{"drug_id": "D3", "source": "mol2vec", "vector": [0.9, 0.1]}
{"drug_id": "D4", "source": "mol2vec", "vector": [-0.5, 0.3]}
{"drug_id": "D5", "source": "mol2vec", "vector": [0.4, -0.6]}
{"drug_id": "D6", "source": "mol2vec", "vector": [1.0, 1.0]}
)");
  write(p.smilesbert,
        R"({"drug_id": "D1", "source": "smilesbert", "vector": [0.3, 0.7]}
{"drug_id": "D2", "source": "smilesbert", "vector": [0.0, 1.0]}
{"drug_id": "D3", "source": "smilesbert", "vector": [0.7, 0.3]}
{"drug_id": "D4", "source": "smilesbert", "vector": [-0.3, 0.5]}
{"drug_id": "D5", "source": "smilesbert", "vector": [0.6, -0.2]}
{"drug_id": "D6", "source": "smilesbert", "vector": [0.8, 1.2]}
)");
  write(p.profiles,
        R"({"drug_id": "D1", "enzymes": ["CYP3A4"], "targets": ["T1"], "atc": ["A10BA02"], "groups": ["G1"], "side_effects": ["S1", "S2", "S3"], "strong_pk_modulator": false}
{"drug_id": "D2", "enzymes": ["cyp3a4"], "targets": ["T2"], "atc": ["A10BB01"], "groups": ["G1"], "side_effects": ["S1", "S2", "S4"], "strong_pk_modulator": false}
{"drug_id": "D3", "enzymes": ["CYP2D6"], "targets": ["T3"], "atc": ["C09AA01"], "groups": ["G2"], "side_effects": ["S5", "S6"], "strong_pk_modulator": false}
{"drug_id": "D4", "enzymes": ["CYP1A2"], "targets": ["T4"], "atc": ["N02BE01"], "groups": ["G3"], "side_effects": ["S7", "S8"], "strong_pk_modulator": false}
{"drug_id": "D5", "enzymes": [], "targets": ["T5"], "atc": ["J01CA04"], "groups": ["G4"], "side_effects": ["S9"], "strong_pk_modulator": false}
{"drug_id": "D6", "enzymes": ["CYP2D6"], "targets": ["T6"], "atc": ["R03AC02"], "groups": ["G5"], "side_effects": ["S10"], "strong_pk_modulator": true}
)");
  write(p.pairs,
        "drug_a,drug_b,documented\n"
        "D1,D2,1\nD1,D3,0\nD1,D4,0\nD3,D2,1\nD3,D4,0\n"
        "D4,D5,1\nD5,D6,0\nD2,D6,0\nD1,D5,1\nD3,D6,0\n");
  write(p.scaffolds, "drug_id,scaffold\nD1,SA\nD2,SA\nD3,SB\nD4,SC\nD5,SD\nD6,\n");
  return p;
}

inline ddi::cli::RunConfig toy_config(const fs::path& dir) {
  ddi::cli::RunConfig c;
  c.paths = write_toy(dir);
  c.seeds = {13};
  c.budget = ddi::cli::Budget::Smoke;
  c.bootstrap_resamples = 200;
  return c;
}

// Small planted-truth corpus for command-level tests that need a model:
// fast to train, with both classes in every split.
inline ddi::synthetic::Options small_synthetic(std::uint64_t seed = 5) {
  ddi::synthetic::Options o;
  o.drugs = 60;
  o.clusters = 6;
  o.dim = 4;
  o.candidate_pairs = 500;
  o.seed = seed;
  return o;
}

inline ddi::cli::RunConfig synthetic_config(const fs::path& dir, const ddi::synthetic::Options& o) {
  const auto s = ddi::synthetic::generate(o, dir);
  ddi::cli::RunConfig c;
  c.paths.drugs = s.paths.drugs;
  c.paths.mol2vec = s.paths.mol2vec;
  c.paths.smilesbert = s.paths.smilesbert;
  c.paths.profiles = s.paths.profiles;
  c.paths.pairs = s.paths.pairs;
  c.paths.scaffolds = s.paths.scaffolds;
  c.paths.output_dir = dir / "out";
  c.seeds = {13};
  c.budget = ddi::cli::Budget::Smoke;
  c.mlp.hidden_layers = 1;
  c.mlp.neurons_per_layer = 64;
  c.mlp.max_epochs = 8;
  c.search_max_epochs = 3;
  c.search_patience = 2;
  c.bootstrap_resamples = 200;
  return c;
}

}  // namespace fixture
