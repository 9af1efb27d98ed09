import asyncio

from fairtune.actors.supervisor import Supervisor


class Router(Supervisor):
    """Hands each message straight to the inbox of one running child"""
    def __call__(
        self,
        message,
        sender
    ):
        if not self.accepting:
            raise asyncio.CancelledError()
        candidates = [child for child in self._children if child.accepting]
        if not candidates:
            raise asyncio.CancelledError()
        self._logger.debug(f"{self} received message {message} for routing")
        target = self._route(candidates, message, sender)
        self._logger.debug(
            f"{self} is handing the message {message} "\
            f"from {sender} to {target}."
        )
        result = target._loop.create_future()
        target._inbox.put_nowait((message, sender, result))
        return result

    def _route(self, candidates, message, sender):
        """Override in your own Router subclass"""
        raise NotImplementedError
