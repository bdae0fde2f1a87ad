// Writes the synthetic classification corpus (OBJ files plus manifest.json)
// and the named test fixtures into a directory.
//
//   affordsim-corpus OUTDIR

#include <iostream>

#include <CLI11.hpp>

#include "affordsim/corpus.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate the synthetic mesh corpus"};
  std::string dir;
  app.add_option("outdir", dir, "Output directory")->required();
  CLI11_PARSE(app, argc, argv);

  try {
    using namespace affordsim;
    const auto manifest = corpus::write_corpus(corpus::synthetic_corpus(), dir);
    write_obj(shapes::open_box(0.10, 0.10, 0.06, 0.01, 0.01, "hollow_box"), std::filesystem::path(dir) / "hollow_box.obj");
    write_obj(shapes::slot_box(0.20, 0.04, 0.08, 0.01), std::filesystem::path(dir) / "slot_box.obj");
    write_obj(shapes::candlestick(), std::filesystem::path(dir) / "candlestick.obj");
    std::cout << manifest.string() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "affordsim-corpus: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
