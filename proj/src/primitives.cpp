#include "rpltrail/primitives.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <cassert>
#include <stdexcept>

namespace rpltrail {

// ---------------------------------------------------------------- test suite

// Digest of an arbitrary message into one word. A single element maps to its
// own integer value so that mac(k, m) == h(k xor m) holds literally; longer
// messages get an order-sensitive fold. Not cryptographic, but any bit flip
// or block swap changes the digest, which is all the protocol tests need.
static uint64_t fold_msg(const Bytes& msg) {
  if (msg.size() == 8) return load_u64(msg);
  uint64_t acc = 0xcbf29ce484222325ULL;
  size_t i = 0;
  while (i < msg.size()) {
    uint64_t block = 0;
    for (size_t j = 0; j < 8; ++j)
      block = block << 8 | (i + j < msg.size() ? msg[i + j] : 0);
    acc = (acc ^ block) * 0x100000001b3ULL;
    i += 8;
  }
  return acc ^ (uint64_t)msg.size();
}

PrimitiveSuite make_test_suite(uint64_t root_secret) {
  PrimitiveSuite s;
  s.name = "test";
  s.width = 8;
  s.sig_width = 8;
  s.hash = [](const Bytes& e) { return make_u64(load_u64(e) + 1); };
  s.mac = [](const Bytes& k, const Bytes& m) {
    return make_u64((load_u64(k) ^ fold_msg(m)) + 1);
  };
  s.enc = [](const Bytes& k, const Bytes& m) { return xor_bytes(k, m); };
  s.dec = [](const Bytes& k, const Bytes& m) { return xor_bytes(k, m); };

  struct TestSigner : Signer {
    uint64_t secret;
    explicit TestSigner(uint64_t sec) : secret(sec) {}
    Bytes sign(const Bytes& msg) const override {
      return make_u64((secret ^ fold_msg(msg)) + 1);
    }
  };
  auto signer = std::make_shared<TestSigner>(root_secret);
  s.root_signer = signer;
  s.verify = [signer](const Bytes& msg, const Bytes& sig) {
    return sig.size() == 8 && signer->sign(msg) == sig;
  };
  return s;
}

// ---------------------------------------------------------- production suite

static Bytes sha256_trunc(const Bytes& in, size_t width) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int mdlen = 0;
  if (EVP_Digest(in.data(), in.size(), md, &mdlen, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  assert(mdlen >= width);
  return Bytes(md, md + width);
}

static Bytes hmac_trunc(const Bytes& key, const Bytes& msg, size_t width) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int mdlen = 0;
  if (!HMAC(EVP_sha256(), key.data(), (int)key.size(), msg.data(), msg.size(),
            md, &mdlen))
    throw std::runtime_error("hmac failed");
  assert(mdlen >= width);
  return Bytes(md, md + width);
}

static Bytes aes128_block(const Bytes& key, const Bytes& block, bool encrypt) {
  assert(key.size() == 16 && block.size() == 16);
  EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
  if (!ctx) throw std::runtime_error("cipher ctx");
  Bytes out(32);
  int len = 0, total = 0;
  int ok = EVP_CipherInit_ex(ctx, EVP_aes_128_ecb(), nullptr, key.data(),
                             nullptr, encrypt ? 1 : 0);
  ok = ok && EVP_CIPHER_CTX_set_padding(ctx, 0);
  ok = ok && EVP_CipherUpdate(ctx, out.data(), &len, block.data(),
                              (int)block.size());
  total = len;
  ok = ok && EVP_CipherFinal_ex(ctx, out.data() + total, &len);
  total += len;
  EVP_CIPHER_CTX_free(ctx);
  if (!ok || total != 16) throw std::runtime_error("aes failed");
  out.resize(16);
  return out;
}

namespace {

struct Ed25519Signer : Signer {
  EVP_PKEY* key = nullptr;
  Ed25519Signer() {
    EVP_PKEY_CTX* kctx = EVP_PKEY_CTX_new_id(EVP_PKEY_ED25519, nullptr);
    if (!kctx || EVP_PKEY_keygen_init(kctx) != 1 ||
        EVP_PKEY_keygen(kctx, &key) != 1)
      throw std::runtime_error("ed25519 keygen failed");
    EVP_PKEY_CTX_free(kctx);
  }
  ~Ed25519Signer() override { EVP_PKEY_free(key); }
  Bytes sign(const Bytes& msg) const override {
    EVP_MD_CTX* mctx = EVP_MD_CTX_new();
    size_t siglen = 0;
    if (!mctx ||
        EVP_DigestSignInit(mctx, nullptr, nullptr, nullptr, key) != 1 ||
        EVP_DigestSign(mctx, nullptr, &siglen, msg.data(), msg.size()) != 1)
      throw std::runtime_error("sign failed");
    Bytes sig(siglen);
    if (EVP_DigestSign(mctx, sig.data(), &siglen, msg.data(), msg.size()) != 1)
      throw std::runtime_error("sign failed");
    EVP_MD_CTX_free(mctx);
    sig.resize(siglen);
    return sig;
  }
  bool check(const Bytes& msg, const Bytes& sig) const {
    EVP_MD_CTX* vctx = EVP_MD_CTX_new();
    if (!vctx) return false;
    bool ok = EVP_DigestVerifyInit(vctx, nullptr, nullptr, nullptr, key) == 1 &&
              EVP_DigestVerify(vctx, sig.data(), sig.size(), msg.data(),
                               msg.size()) == 1;
    EVP_MD_CTX_free(vctx);
    return ok;
  }
};

}  // namespace

PrimitiveSuite make_production_suite() {
  PrimitiveSuite s;
  s.name = "production";
  s.width = 16;
  s.sig_width = 64;
  size_t w = s.width;
  s.hash = [w](const Bytes& e) { return sha256_trunc(e, w); };
  s.mac = [w](const Bytes& k, const Bytes& m) { return hmac_trunc(k, m, w); };
  s.enc = [](const Bytes& k, const Bytes& m) { return aes128_block(k, m, true); };
  s.dec = [](const Bytes& k, const Bytes& m) { return aes128_block(k, m, false); };
  auto signer = std::make_shared<Ed25519Signer>();
  s.root_signer = signer;
  s.verify = [signer](const Bytes& msg, const Bytes& sig) {
    return signer->check(msg, sig);
  };
  return s;
}

}  // namespace rpltrail
