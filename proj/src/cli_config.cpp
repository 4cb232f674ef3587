#include "phyloabc/cli_config.hpp"

#include <cctype>
#include <cstddef>
#include <fstream>
#include <set>
#include <stdexcept>

namespace phyloabc {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

std::vector<std::string> expand_config_args(const std::vector<std::string>& argv_in) {
  std::vector<std::string> args;
  std::string path;
  for (std::size_t i = 0; i < argv_in.size(); ++i) {
    const std::string& tok = argv_in[i];
    if (tok == "--config") {
      if (i + 1 == argv_in.size())
        throw std::runtime_error("--config expects a file path");
      path = argv_in[++i];
    } else if (tok.rfind("--config=", 0) == 0) {
      path = tok.substr(9);
      if (path.empty()) throw std::runtime_error("--config expects a file path");
    } else {
      args.push_back(tok);
    }
  }
  if (path.empty()) return args;

  std::set<std::string> given;
  for (const auto& tok : args)
    if (tok.rfind("--", 0) == 0) given.insert(tok.substr(0, tok.find('=')));

  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string text = trim(line.substr(0, line.find('#')));
    if (text.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    const auto pos = text.find('=');
    std::string key = pos == std::string::npos ? "" : trim(text.substr(0, pos));
    while (!key.empty() && key.front() == '-') key.erase(key.begin());
    if (key.empty())
      throw std::runtime_error(where + ": expected key=value, got '" + text + "'");
    if (key == "config")
      throw std::runtime_error(where + ": config files cannot nest");
    if (given.count("--" + key)) continue;
    args.push_back("--" + key + "=" + trim(text.substr(pos + 1)));
  }
  return args;
}

}  // namespace phyloabc
