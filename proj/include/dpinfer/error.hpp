#ifndef DPINFER_ERROR_HPP
#define DPINFER_ERROR_HPP

#include <charconv>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dpinfer {

/// Failure categories. Each maps onto a distinct CLI exit code.
enum class ErrorKind {
  invalid_input,          // malformed data, violated preconditions
  undefined_dp,           // every success rate is zero, DP has no value
  test_undefined,         // zero standard error where a test needs one
  domain,                 // argument outside a function's mathematical domain
  inference_unavailable,  // e.g. a boundary MLE feeding the DP pipeline
};

/// Shortest decimal text that reads back as the same double.
inline std::string format_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid_input";
    case ErrorKind::undefined_dp: return "undefined_dp";
    case ErrorKind::test_undefined: return "test_undefined";
    case ErrorKind::domain: return "domain";
    case ErrorKind::inference_unavailable: return "inference_unavailable";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

/// A warning raised somewhere in the pipeline. Never fatal; carried along with
/// results so the report can list every one of them.
struct Diagnostic {
  std::string code;
  std::string message;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

using Diagnostics = std::vector<Diagnostic>;

inline void append(Diagnostics& into, const Diagnostics& from) {
  into.insert(into.end(), from.begin(), from.end());
}

inline bool has_diagnostic(const Diagnostics& diags, const std::string& code) {
  for (const auto& d : diags) {
    if (d.code == code) return true;
  }
  return false;
}

}  // namespace dpinfer

#endif  // DPINFER_ERROR_HPP
