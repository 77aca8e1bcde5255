#include "woundbench/json_format.hpp"

#include "woundbench/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace woundbench {

namespace {

void emit(const nlohmann::json& j, int indent, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      // nlohmann::json objects are std::map backed, so iteration is key-sorted
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) {
          out += ",\n";
        }
        first = false;
        out += inner;
        out += nlohmann::json(it.key()).dump();
        out += ": ";
        emit(it.value(), indent + 1, out);
      }
      out += "\n" + pad + "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i > 0) {
          out += ",\n";
        }
        out += inner;
        emit(j[i], indent + 1, out);
      }
      out += "\n" + pad + "]";
      return;
    }
    case nlohmann::json::value_t::number_float: {
      // -0 would re-read as the integer 0
      const double v = j.get<double>() + 0.0;
      if (!std::isfinite(v)) {
        out += "null";
        return;
      }
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out += buf;
      return;
    }
    default:
      out += j.dump();
      return;
  }
}

} // namespace

std::string format_json(const nlohmann::json& doc) {
  std::string out;
  emit(doc, 0, out);
  out += "\n";
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) {
      throw input_error("cannot open " + tmp.string() + " for writing");
    }
    os.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!os) {
      throw input_error("write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw input_error("cannot rename into " + path.string() + ": " + ec.message());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw input_error("cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

} // namespace woundbench
