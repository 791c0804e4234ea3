"""Wire protocol, authority service and citizen client."""

from .dealer import DealerClient, DealerServer, serve_dealer
from .fleet import (BBox, FleetEntry, FleetError, FleetRegistry, generate_fleet, ingest_fleet,
                    parse_fleet, pose_from_record, pose_to_record, update_drone, write_fleet)
from .framing import (FRAME_OVERHEAD, MAX_PAYLOAD, Frame, FrameError, FrameTooLarge,
                      UnknownMessageType, decode_frame, encode_frame, error_frame)
from .transport import (AuthorityConfig, AuthorityServer, ConnectionClosed, FramedSocket,
                        QueryResult, QuerySession, WireStats, drive, parse_address,
                        query_as_citizen, serve_authority)

__all__ = [name for name in dir() if not name.startswith("_")]
