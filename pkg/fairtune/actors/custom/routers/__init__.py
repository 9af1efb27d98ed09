from fairtune.actors.custom.routers.round_robin_router import RoundRobinRouter
from fairtune.actors.custom.routers.shortest_queue_router import ShortestQueueRouter


ROUTERS = {
    "round_robin": RoundRobinRouter,
    "shortest_queue": ShortestQueueRouter,
}
