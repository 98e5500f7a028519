#include <catch2/catch_amalgamated.hpp>

#include "p2piot/txbuild.hpp"

using namespace p2piot;

namespace {

Keypair kp(uint64_t i) { return keypair_from_seed(derive_key32("test-key", i)); }

}  // namespace

TEST_CASE("sign then verify round trip") {
    TxAuthor alice(kp(1), "alice");
    auto tx = alice.transfer(kp(2).public_key, 42);
    CHECK(verify_transaction(tx));

    SECTION("flipping a payload byte breaks the signature") {
        auto bad = tx;
        bad.payload[0] ^= 0x01;
        CHECK_FALSE(verify_transaction(bad));
    }
    SECTION("a different key does not verify") {
        auto bad = tx;
        bad.sender = kp(2).id();
        CHECK_FALSE(verify_transaction(bad));
    }
    SECTION("tampered tx id is caught") {
        auto bad = tx;
        bad.tx_id[0] ^= 0xff;
        CHECK_FALSE(verify_transaction(bad));
    }
    SECTION("zeroed signature fails") {
        auto bad = tx;
        bad.signature = Sig64{};
        CHECK_FALSE(verify_transaction(bad));
    }
}

TEST_CASE("sign_transaction rejects a sender/key mismatch") {
    Transaction tx;
    tx.channel = Channel::Payment;
    tx.sender = kp(1).id();
    tx.payload = encode_payload(MintPay{kp(2).public_key, 1});
    auto r = sign_transaction(tx, kp(2));
    REQUIRE(!r.ok());
    CHECK(r.error() == TxError::KeyMismatch);
}

TEST_CASE("transaction encoding round trips") {
    TxAuthor a(kp(3), "node");
    auto tx = a.record_event(RecordKind::Invoice, kp(3).public_key, kp(4).public_key,
                             Bytes{1, 2, 3});
    auto bytes = encode_transaction(tx);
    ByteReader r(bytes);
    auto back = decode_transaction(r);
    REQUIRE(back.has_value());
    CHECK(back->tx_id == tx.tx_id);
    CHECK(back->payload == tx.payload);
    CHECK(back->nonce == tx.nonce);
    CHECK(verify_transaction(*back));
    CHECK(r.done());
}

TEST_CASE("payload codecs round trip and reject junk") {
    SECTION("transfer") {
        TransferPay p{kp(1).public_key, 777, Bytes{'m'}};
        auto decoded = decode_payload(Channel::Payment, encode_payload(p));
        REQUIRE(decoded.has_value());
        auto* t = std::get_if<TransferPay>(&*decoded);
        REQUIRE(t != nullptr);
        CHECK(t->amount == 777);
        CHECK(t->memo == Bytes{'m'});
    }
    SECTION("market post") {
        MarketPostPay p{derive_key32("prod", 1), "air-quality", Bytes{'d'}, 5,
                        Delivery::EscrowedBatch, Bytes{'e', 'p'}};
        auto decoded = decode_payload(Channel::AppSpecific, encode_payload(p));
        REQUIRE(decoded.has_value());
        auto* m = std::get_if<MarketPostPay>(&*decoded);
        REQUIRE(m != nullptr);
        CHECK(m->topic == "air-quality");
        CHECK(m->delivery == Delivery::EscrowedBatch);
    }
    SECTION("kind byte from the wrong channel fails") {
        auto bytes = encode_payload(RatePeer{kp(1).public_key, 5, Key32{}});
        CHECK_FALSE(decode_payload(Channel::Records, bytes).has_value());
    }
    SECTION("trailing bytes are malformed") {
        auto bytes = encode_payload(MintPay{kp(1).public_key, 1});
        bytes.push_back(0);
        CHECK_FALSE(decode_payload(Channel::Payment, bytes).has_value());
    }
    SECTION("nested delegation is rejected") {
        auto inner = encode_payload(MintPay{kp(1).public_key, 1});
        auto once = encode_payload(DelegatedPay{kp(2).public_key, inner});
        CHECK(decode_payload(Channel::Payment, once).has_value());
        auto twice = encode_payload(DelegatedPay{kp(3).public_key, once});
        CHECK_FALSE(decode_payload(Channel::Payment, twice).has_value());
    }
}

TEST_CASE("counterparty extraction sees through delegation") {
    auto inner = encode_payload(TransferPay{kp(5).public_key, 9, {}});
    auto wrapped = encode_payload(DelegatedPay{kp(6).public_key, inner});
    auto parties = payload_counterparties(Channel::Payment, wrapped);
    REQUIRE(parties.size() == 2);
    CHECK(parties[0] == kp(6).public_key);  // origin
    CHECK(parties[1] == kp(5).public_key);  // recipient
}
