#include <CLI11.hpp>
#include <iostream>

#include "commands.hpp"
#include "manikey/errors.hpp"

// Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.
int main(int argc, char** argv) {
  CLI::App app{"Semantic keypoint annotation on multi-camera point clouds"};
  app.set_help_all_flag("--help-all");
  manikey::cli::setup(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const manikey::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const manikey::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
