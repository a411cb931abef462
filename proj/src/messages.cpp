#include "rpltrail/messages.hpp"

namespace rpltrail {

namespace {

struct KindVisitor {
  const char* operator()(const DioPlain&) { return "dio"; }
  const char* operator()(const Dao&) { return "dao"; }
  const char* operator()(const Dis&) { return "dis"; }
  const char* operator()(const RankAnnounce&) { return "announce"; }
  const char* operator()(const Datagram&) { return "datagram"; }
  const char* operator()(const VeraInit&) { return "vera_init"; }
  const char* operator()(const VeraDio&) { return "vera_dio"; }
  const char* operator()(const VppInit&) { return "vpp_init"; }
  const char* operator()(const VppDio&) { return "vpp_dio"; }
  const char* operator()(const Challenge&) { return "challenge"; }
  const char* operator()(const ChallengeResponse&) { return "response"; }
  const char* operator()(const SolvedNotice&) { return "solved_notice"; }
  const char* operator()(const ValidationReport&) { return "validation_report"; }
  const char* operator()(const FailureNotice&) { return "failure_notice"; }
  const char* operator()(const Legitimation&) { return "legitimation"; }
  const char* operator()(const TrailTest&) { return "trail_test"; }
  const char* operator()(const TrailSigned&) { return "trail_signed"; }
  const char* operator()(const TrailContrib&) { return "trail_up"; }
  const char* operator()(const TrailAttest&) { return "trail_attest"; }
  const char* operator()(const ColluderRelay&) { return "colluder_relay"; }
};

struct SizeVisitor {
  double w, sig;
  double operator()(const DioPlain&) { return 8; }
  double operator()(const Dao& m) { return 1 + 4.0 * m.subtree.size(); }
  double operator()(const Dis&) { return 4; }
  double operator()(const RankAnnounce&) { return 4; }
  double operator()(const Datagram&) { return 13; }
  double operator()(const VeraInit&) { return w + 4 + w + sig; }
  double operator()(const VeraDio&) { return 4 + 3 * w + 4; }
  double operator()(const VppInit&) { return w + 4 + 2 * w + sig; }
  double operator()(const VppDio&) { return 4 + 3 * w + 4; }
  double operator()(const Challenge&) { return 8; }
  double operator()(const ChallengeResponse&) { return w; }
  double operator()(const SolvedNotice&) { return 4 + 8 + w + 4; }
  double operator()(const ValidationReport&) { return 8; }
  double operator()(const FailureNotice&) { return 16; }
  double operator()(const Legitimation&) { return 4 + 4 + 4 + sig + 2; }
  double operator()(const TrailTest&) { return 8 + 4 + 4 + 4; }
  double operator()(const TrailSigned&) { return 8 + 4 + 4 + sig; }
  double operator()(const TrailContrib& m) { return m.array.slice_bits() / 8.0; }
  double operator()(const TrailAttest& m) { return m.array.slice_bits() / 8.0; }
  double operator()(const ColluderRelay& m) {
    double total = 0;
    for (const auto& [id, c] : m.contribs)
      total += 8 + c.array.slice_bits() / 8.0;
    return total;
  }
};

}  // namespace

const char* kind_of(const Message& m) { return std::visit(KindVisitor{}, m); }

double wire_bytes(const Message& m, size_t elem_w, size_t sig_w) {
  return std::visit(SizeVisitor{double(elem_w), double(sig_w)}, m);
}

}  // namespace rpltrail
