#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include "kgforge/graph.hpp"

namespace testing {

namespace fs = std::filesystem;

inline fs::path scratch_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("kgforge-test-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

/// Graph over entities e0..e{n-1} and relations r0..r{m-1}; ids match the numbers.
inline kgforge::KnowledgeGraph make_graph(int n_entities, int n_relations,
                                          std::vector<kgforge::Triple> train,
                                          std::vector<kgforge::Triple> test = {}) {
  kgforge::KnowledgeGraph g;
  for (int i = 0; i < n_entities; ++i) g.entities.intern("e" + std::to_string(i));
  for (int i = 0; i < n_relations; ++i) g.relations.intern("r" + std::to_string(i));
  g.train = std::move(train);
  g.test = std::move(test);
  return g;
}

inline fs::path nations_dir() { return fs::path(KGFORGE_TEST_DATA) / "nations"; }

}  // namespace testing
