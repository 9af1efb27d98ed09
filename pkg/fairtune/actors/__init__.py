from fairtune.actors.actor import Actor
from fairtune.actors.supervisor import Supervisor, Gru
from fairtune.actors.supervisor import RESTART, SHUTDOWN
from fairtune.actors.router import Router
