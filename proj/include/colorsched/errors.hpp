#pragma once

#include <stdexcept>
#include <string>

namespace colorsched {

// Machine-checkable failure reasons. Every exception thrown by the toolkit
// carries one of these so callers (and the CLI) can distinguish bad input
// from resource blow-ups without parsing message text.
enum class errc {
  bad_config,            // cache geometry or option values out of range
  malformed_document,    // JSON/CSV does not match the expected layout
  duplicate_block,       // two blocks share an id
  unknown_block,         // edge/loop/entry/exit names a block that does not exist
  bad_page_count,        // page_count disagrees with the pages blocks touch
  page_out_of_range,     // block placed on a page outside [0, page_count)
  line_out_of_range,     // block line span invalid for the cache geometry
  unreachable_block,     // block not reachable from entry
  exit_unreachable,      // exit not reachable from some block
  unbounded_cycle,       // cycle survives after removing declared back edges
  irreducible_cfg,       // back edge whose header does not dominate its source
  bad_loop,              // malformed loop declaration (bound, back edges, overlap)
  bad_coloring,          // coloring size/budget does not fit the program
  bad_budget,            // color budget or way/page relation leaves no valid share
  bad_task,              // task parameters violate deadline/period constraints
  inconsistent_ids,      // task ids disagree across documents (tables vs set)
  checkpoint_overflow,   // demand check-point set exceeded its cap
  coefficient_overflow,  // integer scaling overflowed (LP export, horizons)
  oracle_scope,          // instance too large for a brute-force oracle
  io_failure,            // file could not be read or written
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::bad_config: return "BAD_CONFIG";
    case errc::malformed_document: return "MALFORMED_DOCUMENT";
    case errc::duplicate_block: return "DUPLICATE_BLOCK";
    case errc::unknown_block: return "UNKNOWN_BLOCK";
    case errc::bad_page_count: return "BAD_PAGE_COUNT";
    case errc::page_out_of_range: return "PAGE_OUT_OF_RANGE";
    case errc::line_out_of_range: return "LINE_OUT_OF_RANGE";
    case errc::unreachable_block: return "UNREACHABLE_BLOCK";
    case errc::exit_unreachable: return "EXIT_UNREACHABLE";
    case errc::unbounded_cycle: return "UNBOUNDED_CYCLE";
    case errc::irreducible_cfg: return "IRREDUCIBLE_CFG";
    case errc::bad_loop: return "BAD_LOOP";
    case errc::bad_coloring: return "BAD_COLORING";
    case errc::bad_budget: return "BAD_BUDGET";
    case errc::bad_task: return "BAD_TASK";
    case errc::inconsistent_ids: return "INCONSISTENT_IDS";
    case errc::checkpoint_overflow: return "CHECKPOINT_OVERFLOW";
    case errc::coefficient_overflow: return "COEFFICIENT_OVERFLOW";
    case errc::oracle_scope: return "ORACLE_SCOPE";
    case errc::io_failure: return "IO_FAILURE";
  }
  return "UNKNOWN";
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) {}

  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) {
  throw error(code, what);
}

inline void require(bool ok, errc code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace colorsched
