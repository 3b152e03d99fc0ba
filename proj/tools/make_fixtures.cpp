/*
 * Copyright 2026 The Renewal Simulator Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Writes a small oracle-backed run directory.
//
//   make_fixtures DIR [--records N] [--vocab N] [--seed S]

#include <iostream>

#include "CLI11.hpp"

#include "fixture_writer.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a fixture run directory"};
  std::string dir;
  renewal::fixtures::FixtureSpec spec;
  app.add_option("dir", dir, "Output directory")->required();
  app.add_option("--records", spec.records, "Manifest records");
  app.add_option("--vocab", spec.vocab_size, "Vocabulary size");
  app.add_option("--seed", spec.seed, "Seed");
  app.add_option("--optimum", spec.optimum_word, "Oracle optimum word");
  CLI11_PARSE(app, argc, argv);
  renewal::fixtures::write_fixture_set(dir, spec);
  std::cout << "wrote " << dir << '\n';
  return 0;
}
