class ConvergenceError(RuntimeError):
    """Raised when a solver hits its iteration cap.

    Carries the best iterate reached so far and its stopping criterion
    value (duality gap for the inner solver, KKT residual otherwise).
    """

    def __init__(self, message, w=None, criterion=None):
        super().__init__(message)
        self.w = w
        self.criterion = criterion
