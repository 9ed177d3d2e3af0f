"""
Exceções customizadas da aplicação.

Define hierarquia de exceções para tratamento de erros
específicos do domínio de navegação social com MPC.
"""

from typing import Any, Optional


class SocialNavException(Exception):
    """
    Exceção base do benchmark.

    Todas as exceções de domínio devem herdar desta classe.

    Attributes:
        message: Mensagem de erro
        code: Código de erro para identificação
        details: Detalhes adicionais do erro
    """

    def __init__(
        self,
        message: str,
        code: str = "SOCIAL_NAV_ERROR",
        details: Optional[dict[str, Any]] = None
    ):
        self.message = message
        self.code = code
        self.details = details or {}
        super().__init__(self.message)

    def to_dict(self) -> dict[str, Any]:
        """Converte exceção para dicionário."""
        return {
            "error": self.code,
            "message": self.message,
            "details": self.details
        }


class CorruptedStateError(SocialNavException):
    """
    Estado ou comando com valores não finitos.

    Levantado pela dinâmica quando recebe NaN/inf, o que indica
    corrupção do estado em algum ponto anterior do laço.
    """

    def __init__(self, message: str, details: Optional[dict] = None):
        super().__init__(message=message, code="CORRUPTED_STATE", details=details)


class ConfigurationError(SocialNavException):
    """
    Erro de configuração.

    Levantado quando parâmetros físicos, de solver ou de cenário
    são inconsistentes.

    Example:
        raise ConfigurationError("sigma0 deve ser positivo", {"sigma0": 0.0})
    """

    def __init__(
        self,
        message: str,
        details: Optional[dict] = None,
        code: str = "CONFIGURATION_ERROR"
    ):
        super().__init__(message=message, code=code, details=details)


class UnknownControllerError(ConfigurationError):
    """
    Nome de controlador desconhecido.

    Attributes:
        name: Nome solicitado
        valid_names: Nomes aceitos pelo catálogo
    """

    def __init__(self, name: str, valid_names: list[str]):
        message = (
            f"Controlador desconhecido: {name}. "
            f"Válidos: {', '.join(valid_names)}"
        )
        super().__init__(
            message=message,
            details={"name": name, "valid_names": list(valid_names)},
            code="UNKNOWN_CONTROLLER"
        )
        self.name = name
        self.valid_names = list(valid_names)


class OutputPathError(ConfigurationError):
    """
    Diretório de saída não gravável.

    Levantado na verificação prévia, antes de qualquer episódio rodar.
    """

    def __init__(self, path: str, reason: str):
        super().__init__(
            message=f"Diretório de saída inválido: {path} ({reason})",
            details={"path": path, "reason": reason},
            code="OUTPUT_PATH_ERROR"
        )


class SingularCovarianceError(SocialNavException):
    """
    Covariância não positiva definida ou quase singular.

    Attributes:
        track_id: Pedestre cuja predição tem a covariância inválida
        determinant: Determinante encontrado
    """

    def __init__(self, track_id: Optional[int], determinant: float):
        message = (
            f"Covariância quase singular no track {track_id}: "
            f"det={determinant:.3e}"
        )
        super().__init__(
            message=message,
            code="SINGULAR_COVARIANCE",
            details={"track_id": track_id, "determinant": determinant}
        )
        self.track_id = track_id
        self.determinant = determinant


class GenerationError(SocialNavException):
    """
    Falha na geração de cenário.

    Levantado quando a amostragem por rejeição esgota as tentativas
    (anel lotado, objetivo impossível no canto da área, etc.).
    """

    def __init__(self, message: str, cell: Optional[dict[str, Any]] = None):
        super().__init__(
            message=message,
            code="GENERATION_ERROR",
            details={"cell": cell or {}}
        )
        self.cell = cell or {}
