"""
Peeling with murky droplets
===========================

Six blocks, nine droplets, two of them corrupted.  The decoder only trusts a
degree-one droplet once the block it yields hashes to the expected header, so
the bad droplets are thrown away and the chain still comes back intact.
"""

from sefcodes import decode
from sefcodes.toy import toy_fixture

fx = toy_fixture()
for label, d in enumerate(fx.droplets, start=1):
    tag = "murky" if label in fx.murky else ""
    print(f"c{label}: blocks {[m + 1 for m in d.neighbors]} {tag}")

out = decode(fx.droplets, fx.epoch.groups)
st = out.state
print("accepted in order:", [f"c{did + 1}" for did, _ in st.accepted])
print("rejected:", sorted(f"c{did + 1}" for did in st.rejected))
print("recovered every block:", out.blocks == [b.serialize() for b in fx.chain.blocks])
