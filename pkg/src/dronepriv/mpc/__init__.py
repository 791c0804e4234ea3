"""Two-party additive secret sharing over Z/2^128 with Beaver multiplication."""

from .channel import NEW_ROUND, LocalRun, NewRound, Preprocessing, Recv, Send, exchange, run_local
from .circuit import Circuit, EvalResult, Op, Reveal, Wire, evaluate, plaintext_evaluate
from .errors import (BoundError, MPCError, ProtocolError, ScaleMismatchError,
                     TripleExhaustedError, TripleReuseError)
from .prg import Prg
from .ring import (ELEMENT_BYTES, MASK, MAX_MAGNITUDE, MOD, FixedPoint, from_signed, fx_decode,
                   fx_encode, to_signed)
from .shares import (BeaverTriple, Dealer, PartyRole, Share, TripleShare, TripleStore, add,
                     add_public, beaver_close, beaver_open, dealer_generate_triples, mul,
                     mul_public, reconstruct, reveal_to, share, sub)
from .transcript import Direction, MessageRecord, MsgType, Transcript

__all__ = [name for name in dir() if not name.startswith("_")]
